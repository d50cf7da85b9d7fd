//! Exact pinned and mixed gradient measure tables on finite windows.
//!
//! A configuration assigns a gradient ζ_e ∈ [−M, M] to every window edge. With the
//! root pinned at residue s, each vertex v gets height s + (sum of ζ along the path
//! to v). The unnormalised weight is
//!
//! ```text
//! θ^{Σ|ζ_e|} · Π_{inner v} h(height_v) · Π_{boundary y} z(height_y)
//! ```
//!
//! and the mixed measure sums these weights over the four residues s.

use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::law::PeriodicBoundaryLaw;
use super::window::{budget_from_env, TreeWindow};
use crate::error::{Error, Result};

/// Entries below this weight are flushed to zero before normalisation.
const UNDERFLOW: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pin {
    Pinned(u8),
    Mixed,
}

impl Serialize for Pin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Pin::Pinned(r) => s.serialize_u8(*r),
            Pin::Mixed => s.serialize_str("mixed"),
        }
    }
}

/// Probabilities indexed in mixed radix 2M + 1 with edge 0 as the least significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientMeasureTable {
    pub window: TreeWindow,
    pub m: u32,
    pub pin: Pin,
    pub probabilities: Vec<f64>,
    /// Sum of the unnormalised weights.
    pub normalizer: f64,
}

impl GradientMeasureTable {
    fn base(&self) -> usize {
        2 * self.m as usize + 1
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.par_iter().sum()
    }

    pub fn gradients(&self, index: usize) -> Vec<i64> {
        decode(index, self.base(), self.window.edge_count(), self.m)
    }

    pub fn index_of(&self, zeta: &[i64]) -> Option<usize> {
        let m = self.m as i64;
        if zeta.len() != self.window.edge_count() || zeta.iter().any(|z| z.abs() > m) {
            return None;
        }
        Some(
            zeta.iter()
                .rev()
                .fold(0, |acc, z| acc * self.base() + (z + m) as usize),
        )
    }

    pub fn get(&self, zeta: &[i64]) -> Option<f64> {
        self.index_of(zeta).map(|i| self.probabilities[i])
    }

    /// Distribution of ζ on one edge, indexed by ζ + M.
    pub fn edge_marginal(&self, edge: usize) -> Vec<f64> {
        let base = self.base();
        let stride = base.pow(edge as u32);
        let mut out = vec![0.0; base];
        for (i, p) in self.probabilities.iter().enumerate() {
            out[(i / stride) % base] += p;
        }
        out
    }

    /// Brute-force marginal onto the edges of a smaller ball with the same root.
    pub fn marginalize(&self, inner: &TreeWindow) -> Result<GradientMeasureTable> {
        if inner.k != self.window.k || inner.radius > self.window.radius {
            return Err(Error::InvalidParameter(
                "target window is not a sub-ball".into(),
            ));
        }
        let size = self.base().pow(inner.edge_count() as u32);
        let mut probabilities = vec![0.0; size];
        for (i, p) in self.probabilities.iter().enumerate() {
            probabilities[i % size] += p;
        }
        Ok(GradientMeasureTable {
            window: inner.clone(),
            m: self.m,
            pin: self.pin,
            probabilities,
            normalizer: self.normalizer,
        })
    }

    pub fn max_abs_diff(&self, other: &GradientMeasureTable) -> Result<f64> {
        if self.len() != other.len() || self.m != other.m {
            return Err(Error::InvalidParameter(
                "tables have different shapes".into(),
            ));
        }
        Ok(self
            .probabilities
            .par_iter()
            .zip(other.probabilities.par_iter())
            .map(|(a, b)| (a - b).abs())
            .reduce(|| 0.0, f64::max))
    }
}

struct Entries<'a>(&'a GradientMeasureTable);

impl Serialize for Entries<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let t = self.0;
        let nonzero = t.probabilities.iter().filter(|p| **p > 0.0).count();
        let mut seq = s.serialize_seq(Some(nonzero))?;
        for (i, p) in t.probabilities.iter().enumerate() {
            if *p > 0.0 {
                seq.serialize_element(&(t.gradients(i), p))?;
            }
        }
        seq.end()
    }
}

struct WindowShape(u32, u32);

impl Serialize for WindowShape {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("k", &self.0)?;
        m.serialize_entry("R", &self.1)?;
        m.end()
    }
}

impl Serialize for GradientMeasureTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GradientMeasureTable", 5)?;
        st.serialize_field("window", &WindowShape(self.window.k, self.window.radius))?;
        st.serialize_field("M", &self.m)?;
        st.serialize_field("pin", &self.pin)?;
        st.serialize_field("entries", &Entries(self))?;
        st.serialize_field("Z", &self.normalizer)?;
        st.end()
    }
}

fn decode(mut index: usize, base: usize, edges: usize, m: u32) -> Vec<i64> {
    (0..edges)
        .map(|_| {
            let d = index % base;
            index /= base;
            d as i64 - m as i64
        })
        .collect()
}

/// Unnormalised weights of every configuration for one pinned residue, with
/// `outer(r)` the factor of a boundary vertex at height residue r.
fn pinned_weights(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    s: i64,
    m: u32,
    outer: &[f64; 4],
) -> Vec<f64> {
    let base = 2 * m as usize + 1;
    let edges = window.edge_count();
    let n = base.pow(edges as u32);
    let theta_pow: Vec<f64> = (0..=m).map(|d| law.theta.powi(d as i32)).collect();
    let parent: Vec<usize> = window.parent[1..].iter().map(|p| p.unwrap()).collect();
    let inner: Vec<bool> = (0..window.vertex_count())
        .map(|v| window.is_inner(v))
        .collect();
    let root_factor = law.h_at(s);
    (0..n)
        .into_par_iter()
        .map_init(
            || vec![0i64; window.vertex_count()],
            |height, idx| {
                let mut rest = idx;
                let mut w = root_factor;
                height[0] = s;
                for e in 0..edges {
                    let zeta = (rest % base) as i64 - m as i64;
                    rest /= base;
                    let v = e + 1;
                    let hv = height[parent[e]] + zeta;
                    height[v] = hv;
                    w *= theta_pow[zeta.unsigned_abs() as usize];
                    w *= if inner[v] {
                        law.h_at(hv)
                    } else {
                        outer[hv.rem_euclid(4) as usize]
                    };
                }
                w
            },
        )
        .collect()
}

fn assemble(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    pin: Pin,
    m: u32,
    outer: &[f64; 4],
    budget: u64,
) -> Result<GradientMeasureTable> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "truncation M must be at least 1".into(),
        ));
    }
    if window.k != law.k {
        return Err(Error::MismatchedParameters);
    }
    window.check_budget(m, budget)?;
    let mut weights = match pin {
        Pin::Pinned(s) => pinned_weights(law, window, s as i64, m, outer),
        Pin::Mixed => {
            let mut acc = pinned_weights(law, window, 0, m, outer);
            for s in 1..4 {
                let w = pinned_weights(law, window, s, m, outer);
                acc.par_iter_mut()
                    .zip(w.par_iter())
                    .for_each(|(a, b)| *a += b);
            }
            acc
        }
    };
    weights.par_iter_mut().for_each(|w| {
        if *w < UNDERFLOW {
            *w = 0.0;
        }
    });
    let normalizer: f64 = weights.par_iter().sum();
    if !(normalizer > 0.0) || !normalizer.is_finite() {
        return Err(Error::Domain(format!("normaliser is {normalizer}")));
    }
    weights.par_iter_mut().for_each(|w| *w /= normalizer);
    Ok(GradientMeasureTable {
        window: window.clone(),
        m,
        pin,
        probabilities: weights,
        normalizer,
    })
}

fn check_pin(s: u8) -> Result<Pin> {
    if s < 4 {
        Ok(Pin::Pinned(s))
    } else {
        Err(Error::InvalidParameter(format!(
            "pin residue must be in 0..4, got {s}"
        )))
    }
}

pub fn pinned_measure(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    s: u8,
    m: u32,
) -> Result<GradientMeasureTable> {
    pinned_measure_with_budget(law, window, s, m, budget_from_env())
}

pub fn pinned_measure_with_budget(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    s: u8,
    m: u32,
    budget: u64,
) -> Result<GradientMeasureTable> {
    assemble(law, window, check_pin(s)?, m, &law.z, budget)
}

pub fn mixed_measure(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    m: u32,
) -> Result<GradientMeasureTable> {
    mixed_measure_with_budget(law, window, m, budget_from_env())
}

pub fn mixed_measure_with_budget(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    m: u32,
    budget: u64,
) -> Result<GradientMeasureTable> {
    assemble(law, window, Pin::Mixed, m, &law.z, budget)
}

/// Pinned or mixed table, whichever `pin` names.
pub fn measure_with_budget(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    pin: Pin,
    m: u32,
    budget: u64,
) -> Result<GradientMeasureTable> {
    match pin {
        Pin::Pinned(s) => pinned_measure_with_budget(law, window, s, m, budget),
        Pin::Mixed => mixed_measure_with_budget(law, window, m, budget),
    }
}

/// L_M(r) = Σ_{|ζ| ≤ M} θ^{|ζ|} z(r + ζ): one outer edge summed out over the truncated range.
pub fn truncated_edge_sum(law: &PeriodicBoundaryLaw, r: i64, m: u32) -> f64 {
    let m = m as i64;
    (-m..=m)
        .map(|d| law.theta.powi(d.unsigned_abs() as i32) * law.z_at(r + d))
        .sum()
}

/// Marginal onto `window` of the table on the ball one step larger, with the same M.
///
/// Given the gradients inside `window`, the outer edges below each boundary vertex y
/// are independent, so summing them out replaces z(height_y) by
/// h(height_y) · L_M(height_y)^k. No enumeration of the larger ball is needed.
pub fn marginal_from_outer(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    pin: Pin,
    m: u32,
) -> Result<GradientMeasureTable> {
    marginal_from_outer_with_budget(law, window, pin, m, budget_from_env())
}

pub fn marginal_from_outer_with_budget(
    law: &PeriodicBoundaryLaw,
    window: &TreeWindow,
    pin: Pin,
    m: u32,
    budget: u64,
) -> Result<GradientMeasureTable> {
    let outer: [f64; 4] =
        std::array::from_fn(|r| law.h[r] * truncated_edge_sum(law, r as i64, m).powi(law.k as i32));
    if let Pin::Pinned(s) = pin {
        check_pin(s)?;
    }
    assemble(law, window, pin, m, &outer, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_law::{solve_generic, ModelParams};
    use crate::ggm::law::boundary_law_from_pair;
    use crate::ggm::window::build_window;

    fn law(k: u32, tau: f64, idx: usize) -> PeriodicBoundaryLaw {
        let p = ModelParams::new(k, tau).unwrap();
        boundary_law_from_pair(&solve_generic(&p, 1e-12).unwrap()[idx]).unwrap()
    }

    #[test]
    fn free_law_gives_product_measure() {
        let l = PeriodicBoundaryLaw::from_z(2, 0.3, [1.0; 4]).unwrap();
        let w = build_window(2, 1).unwrap();
        let t = pinned_measure(&l, &w, 0, 8).unwrap();
        let one: f64 = (-8..=8).map(|d: i64| 0.3f64.powi(d.abs() as i32)).sum();
        for zeta in [[0, 0, 0], [1, -2, 3], [8, -8, 0]] {
            let want: f64 = zeta
                .iter()
                .map(|d: &i64| 0.3f64.powi(d.abs() as i32) / one)
                .product();
            assert!((t.get(&zeta).unwrap() - want).abs() < 1e-15);
        }
        let mixed = mixed_measure(&l, &w, 8).unwrap();
        assert!(mixed.max_abs_diff(&t).unwrap() < 1e-15);
    }

    #[test]
    fn tables_sum_to_one() {
        let l = law(2, 7.0, 4);
        let w = build_window(2, 1).unwrap();
        for s in 0..4 {
            let t = pinned_measure(&l, &w, s, 10).unwrap();
            assert!((t.total() - 1.0).abs() < 1e-12);
            assert!(t.probabilities.iter().all(|p| *p >= 0.0));
        }
        assert!(pinned_measure(&l, &w, 4, 10).is_err());
    }

    #[test]
    fn brute_force_marginal_matches_factorised() {
        let l = law(2, 7.0, 3);
        let small = build_window(2, 1).unwrap();
        let big = build_window(2, 2).unwrap();
        for pin in [Pin::Pinned(1), Pin::Mixed] {
            let full = match pin {
                Pin::Pinned(s) => pinned_measure(&l, &big, s, 2).unwrap(),
                Pin::Mixed => mixed_measure(&l, &big, 2).unwrap(),
            };
            let brute = full.marginalize(&small).unwrap();
            let fact = marginal_from_outer(&l, &small, pin, 2).unwrap();
            let d = brute.max_abs_diff(&fact).unwrap();
            // Each coarse entry accumulates about 15k fine entries.
            assert!(d < 1e-11, "{pin:?} {d}");
        }
    }

    #[test]
    fn consistent_family_for_k2() {
        let l = law(2, 7.0, 4);
        let small = build_window(2, 1).unwrap();
        let direct = pinned_measure(&l, &small, 0, 20).unwrap();
        let marginal = marginal_from_outer(&l, &small, Pin::Pinned(0), 20).unwrap();
        assert!(direct.max_abs_diff(&marginal).unwrap() < 1e-8);
    }

    #[test]
    fn pin_shift() {
        let l = law(2, 7.0, 4);
        let w = build_window(2, 1).unwrap();
        let a = pinned_measure(&l.shifted(2), &w, 0, 6).unwrap();
        let b = pinned_measure(&l, &w, 2, 6).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
    }

    #[test]
    fn mixed_is_normalised_sum_of_pinned() {
        let l = law(2, 7.0, 3);
        let w = build_window(2, 1).unwrap();
        let mixed = mixed_measure(&l, &w, 5).unwrap();
        let pinned: Vec<_> = (0..4)
            .map(|s| pinned_measure(&l, &w, s, 5).unwrap())
            .collect();
        let z: f64 = pinned.iter().map(|t| t.normalizer).sum();
        for i in 0..mixed.len() {
            let want: f64 = pinned
                .iter()
                .map(|t| t.probabilities[i] * t.normalizer)
                .sum::<f64>()
                / z;
            assert!((mixed.probabilities[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rerooting_preserves_edge_marginal() {
        // The ball around the first neighbour is isomorphic to the ball around the root,
        // with the shared edge reversed; translation invariance makes its gradient law
        // symmetric under ζ ↦ −ζ.
        let l = law(2, 7.0, 4);
        let w = build_window(2, 1).unwrap();
        let mixed = mixed_measure(&l, &w, 20).unwrap();
        let e = mixed.edge_marginal(0);
        for d in 0..=20 {
            assert!((e[20 + d] - e[20 - d]).abs() < 1e-8);
        }
    }

    #[test]
    fn budget_guard() {
        let l = law(3, 5.0, 0);
        let w = build_window(3, 2).unwrap();
        assert!(matches!(
            pinned_measure_with_budget(&l, &w, 0, 12, 1_000_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let l = PeriodicBoundaryLaw::from_z(2, 0.3, [1.0; 4]).unwrap();
        let t = pinned_measure(&l, &build_window(2, 1).unwrap(), 0, 1).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["window"]["k"], 2);
        assert_eq!(v["window"]["R"], 1);
        assert_eq!(v["M"], 1);
        assert_eq!(v["pin"], 0);
        assert_eq!(v["entries"].as_array().unwrap().len(), 27);
        assert!(v["Z"].as_f64().unwrap() > 0.0);
    }
}
