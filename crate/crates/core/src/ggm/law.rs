//! 4-periodic boundary laws as height functions, their geometric series sums,
//! consistency residuals, transition kernels and the normalisability probe.

use serde::Serialize;

use crate::boundary_law::{BoundaryLawPair, ModelParams};
use crate::error::{Error, Result};
use crate::external_field::FieldSolution;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicBoundaryLaw {
    pub k: u32,
    pub tau: f64,
    pub theta: f64,
    /// (1, b, 1, a) by height residue.
    pub u: [f64; 4],
    /// z_i = h(i) u_i^k, the weight a boundary vertex at height i contributes.
    pub z: [f64; 4],
    /// Field (1, h₂, 1, h₁) by residue; all ones without a field.
    pub h: [f64; 4],
}

fn res(i: i64) -> usize {
    i.rem_euclid(4) as usize
}

impl PeriodicBoundaryLaw {
    fn build(params: &ModelParams, a: f64, b: f64, h1: f64, h2: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && h1 > 0.0 && h2 > 0.0) {
            return Err(Error::Domain(format!(
                "boundary law entries must be positive, got a={a}, b={b}"
            )));
        }
        let u = [1.0, b, 1.0, a];
        let h = [1.0, h2, 1.0, h1];
        let k = params.k as i32;
        let z = std::array::from_fn(|i| h[i] * u[i].powi(k));
        Ok(Self {
            k: params.k,
            tau: params.tau,
            theta: params.theta,
            u,
            z,
            h,
        })
    }

    /// Law with given z-values and no field; for fixtures such as the free law z ≡ 1.
    pub fn from_z(k: u32, theta: f64, z: [f64; 4]) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        if z.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Domain(
                "boundary law entries must be positive".into(),
            ));
        }
        Ok(Self {
            k,
            tau: theta + 1.0 / theta,
            theta,
            u: z.map(|v| v.powf(1.0 / k as f64)),
            z,
            h: [1.0; 4],
        })
    }

    pub fn z_at(&self, i: i64) -> f64 {
        self.z[res(i)]
    }

    pub fn h_at(&self, i: i64) -> f64 {
        self.h[res(i)]
    }

    /// The same law with heights relabelled: z'(i) = z(i + n).
    pub fn shifted(&self, n: i64) -> Self {
        let rot = |v: [f64; 4]| std::array::from_fn(|i| v[res(i as i64 + n)]);
        Self {
            u: rot(self.u),
            z: rot(self.z),
            h: rot(self.h),
            ..self.clone()
        }
    }

    /// G(i) = Σ_j θ^{|i−j|} z_j, summed in closed form over one period.
    pub fn g(&self, i: i64) -> f64 {
        let t = self.theta;
        let t4 = t.powi(4);
        (0..4)
            .map(|d| self.z[res(i + d)] * (t.powi(d as i32) + t.powi(4 - d as i32)))
            .sum::<f64>()
            / (1.0 - t4)
    }
}

pub fn boundary_law_from_pair(pair: &BoundaryLawPair) -> Result<PeriodicBoundaryLaw> {
    PeriodicBoundaryLaw::build(&pair.params, pair.a, pair.b, 1.0, 1.0)
}

pub fn boundary_law_from_field(sol: &FieldSolution) -> Result<PeriodicBoundaryLaw> {
    let fp = &sol.params;
    PeriodicBoundaryLaw::build(&fp.base, sol.a, sol.b, fp.h1, fp.h2)
}

/// Left and right tails l_i = Σ_{j ≤ −1} θ^{|i−j|} z_j and r_i = Σ_{j ≥ 1} θ^{|i−j|} z_j.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesSums {
    /// l_i and r_i at i = 0, 1, 2, 3.
    pub l: [f64; 4],
    pub r: [f64; 4],
    #[serde(skip)]
    z: [f64; 4],
    #[serde(skip)]
    theta: f64,
}

fn right_tail(z: &[f64; 4], theta: f64, i: i64) -> f64 {
    let t4 = theta.powi(4);
    let block = |i: i64| -> f64 {
        (1..=4)
            .map(|d| theta.powi(d) * z[res(i + d as i64)])
            .sum::<f64>()
            / (1.0 - t4)
    };
    if i < 0 {
        return theta.powi((-i) as i32) * block(0);
    }
    let head: f64 = (1..=i)
        .map(|j| theta.powi((i - j) as i32) * z[res(j)])
        .sum();
    head + block(i)
}

impl SeriesSums {
    pub fn r_at(&self, i: i64) -> f64 {
        right_tail(&self.z, self.theta, i)
    }

    /// By reflection j ↦ −j, l_i(z) = r_{−i}(z̃) with z̃_j = z_{−j}.
    pub fn l_at(&self, i: i64) -> f64 {
        let zr = std::array::from_fn(|j| self.z[res(-(j as i64))]);
        right_tail(&zr, self.theta, -i)
    }

    /// l_i + θ^{|i|} z_0 + r_i, the full two-sided sum.
    pub fn total_at(&self, i: i64) -> f64 {
        self.l_at(i) + self.theta.powi(i.unsigned_abs() as i32) * self.z[0] + self.r_at(i)
    }
}

pub fn series_sums(law: &PeriodicBoundaryLaw) -> Result<SeriesSums> {
    if !(law.theta < 1.0) {
        return Err(Error::Domain(format!(
            "series diverge for theta = {}",
            law.theta
        )));
    }
    let mut s = SeriesSums {
        l: [0.0; 4],
        r: [0.0; 4],
        z: law.z,
        theta: law.theta,
    };
    for i in 0..4 {
        s.l[i] = s.l_at(i as i64);
        s.r[i] = s.r_at(i as i64);
    }
    Ok(s)
}

/// Left and right tails cut off at |j| ≤ depth; an oracle for the closed forms.
pub fn truncated_tails(law: &PeriodicBoundaryLaw, i: i64, depth: i64) -> (f64, f64) {
    let t = law.theta;
    let l = (-depth..=-1)
        .map(|j| t.powi((i - j).unsigned_abs() as i32) * law.z_at(j))
        .sum();
    let r = (1..=depth)
        .map(|j| t.powi((i - j).unsigned_abs() as i32) * law.z_at(j))
        .sum();
    (l, r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// max_i relative |h(i)u_i^k − (u_{i−1} + u_{i+1} − τu_i)/(u_{−1} + u_1 − τ)|.
    pub recursion: f64,
    /// max_i relative |z_i − h(i)(G(i)/G(0))^k| with G from the closed-form series.
    pub series: f64,
}

impl ConsistencyReport {
    pub fn max(&self) -> f64 {
        self.recursion.max(self.series)
    }
}

/// Residual of the boundary-law equation in its reduced and in its series form.
pub fn check_consistency(law: &PeriodicBoundaryLaw, tol: f64) -> Result<ConsistencyReport> {
    let u = |i: i64| law.u[res(i)];
    let den = u(-1) + u(1) - law.tau;
    if den.abs() <= tol {
        return Err(Error::SingularLaw(den));
    }
    let k = law.k as i32;
    let rel = |lhs: f64, rhs: f64| (lhs - rhs).abs() / lhs.abs().max(1.0);
    let recursion = (0..4)
        .map(|i| {
            let lhs = law.h_at(i) * u(i).powi(k);
            let rhs = (u(i - 1) + u(i + 1) - law.tau * u(i)) / den;
            rel(lhs, rhs)
        })
        .fold(0.0, f64::max);
    let sums = series_sums(law)?;
    let g0 = sums.total_at(0);
    let series = (0..4)
        .map(|i| {
            let rhs = law.h_at(i) / law.h_at(0) * (sums.total_at(i) / g0).powi(k);
            rel(law.z_at(i), rhs)
        })
        .fold(0.0, f64::max);
    Ok(ConsistencyReport { recursion, series })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalisability {
    Divergent,
    ConvergentSoFar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub verdict: Normalisability,
    /// Growth of the partial sum per unit index over the outer half of the range.
    pub slope: f64,
    pub partial_sum: f64,
    pub depth: i64,
}

/// Partial sums of Σ_i (Σ_j θ^{|i−j|} z_j)^{k+1} over |i| ≤ depth for a periodic law.
pub fn normalisability_probe(law: &PeriodicBoundaryLaw, depth: i64) -> ProbeResult {
    let k = law.k as i32;
    let g: [f64; 4] = std::array::from_fn(|i| law.g(i as i64).powi(k + 1));
    probe_with(|i| g[res(i)], depth)
}

/// Same probe for an arbitrary positive height function z (not necessarily periodic).
/// Inner sums are truncated where θ^{|i−j|} < 1e-300.
pub fn normalisability_probe_fn(
    z: impl Fn(i64) -> f64,
    theta: f64,
    k: u32,
    depth: i64,
) -> ProbeResult {
    let w = (-690.0 / theta.ln()).ceil() as i64;
    let gk = |i: i64| -> f64 {
        let g: f64 = (i - w..=i + w)
            .map(|j| theta.powi((i - j).unsigned_abs() as i32) * z(j))
            .sum();
        g.powi(k as i32 + 1)
    };
    probe_with(gk, depth)
}

fn probe_with(term: impl Fn(i64) -> f64, depth: i64) -> ProbeResult {
    let depth = depth.max(4);
    let half = depth / 2;
    let mut inner = term(0);
    for i in 1..=half {
        inner += term(i) + term(-i);
    }
    let mut outer = 0.0;
    for i in half + 1..=depth {
        outer += term(i) + term(-i);
    }
    let total = inner + outer;
    let slope = outer / (2.0 * (depth - half) as f64);
    let verdict = if outer > 1e-12 * total && slope > 0.0 {
        Normalisability::Divergent
    } else {
        Normalisability::ConvergentSoFar
    };
    ProbeResult {
        verdict,
        slope,
        partial_sum: total,
        depth,
    }
}

/// P(i → j) = z_j θ^{|j−i|} / G(i) on all of ℤ.
pub fn kernel_prob(law: &PeriodicBoundaryLaw, i: i64, j: i64) -> f64 {
    law.z_at(j) * law.theta.powi((j - i).unsigned_abs() as i32) / law.g(i)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelTable {
    pub m: u32,
    /// rows[i + M][j + M] = P(i → j) for i, j in [−M, M].
    pub rows: Vec<Vec<f64>>,
    /// Mass of each row that falls inside the window.
    pub row_mass: Vec<f64>,
    /// Upper bound on the missing mass of each row.
    pub tail_bound: Vec<f64>,
}

pub fn transition_kernel(law: &PeriodicBoundaryLaw, m: u32) -> Result<KernelTable> {
    if m < 1 {
        return Err(Error::InvalidParameter("kernel window needs M >= 1".into()));
    }
    let mi = m as i64;
    let zmax = law.z.iter().copied().fold(f64::MIN, f64::max);
    let zmin = law.z.iter().copied().fold(f64::MAX, f64::min);
    let t = law.theta;
    let mut rows = Vec::with_capacity(2 * m as usize + 1);
    let mut row_mass = Vec::new();
    let mut tail_bound = Vec::new();
    for i in -mi..=mi {
        let row: Vec<f64> = (-mi..=mi).map(|j| kernel_prob(law, i, j)).collect();
        row_mass.push(row.iter().sum());
        let gap = (mi - i.abs() + 1) as i32;
        tail_bound.push(2.0 * t.powi(gap) / (1.0 - t) * zmax / zmin);
        rows.push(row);
    }
    Ok(KernelTable {
        m,
        rows,
        row_mass,
        tail_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identifiability {
    PossiblyEqual,
    Distinct,
}

const IDENT_TOL: f64 = 1e-9;

/// Necessary condition for two laws to give the same gradient measure:
/// equal sums a + b, or sums whose product is 4.
pub fn identifiability_check(
    p1: &BoundaryLawPair,
    p2: &BoundaryLawPair,
) -> Result<Identifiability> {
    if p1.params.k != p2.params.k || p1.params.tau != p2.params.tau {
        return Err(Error::MismatchedParameters);
    }
    let (s1, s2) = (p1.a + p1.b, p2.a + p2.b);
    let same =
        (s1 - s2).abs() <= IDENT_TOL * s1.max(s2) || (s1 * s2 - 4.0).abs() <= IDENT_TOL * 4.0;
    Ok(if same {
        Identifiability::PossiblyEqual
    } else {
        Identifiability::Distinct
    })
}

/// Number of classes of the equivalence generated by "possibly equal"; an upper bound
/// on the number of distinct gradient measures the pairs induce.
pub fn identifiability_classes(pairs: &[BoundaryLawPair]) -> Result<usize> {
    let n = pairs.len();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], mut x: usize) -> usize {
        while root[x] != x {
            root[x] = root[root[x]];
            x = root[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if identifiability_check(&pairs[i], &pairs[j])? == Identifiability::PossiblyEqual {
                let (a, b) = (find(&mut root, i), find(&mut root, j));
                root[a] = b;
            }
        }
    }
    Ok((0..n).filter(|&i| find(&mut root, i) == i).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_law::{solve_generic, ModelParams};

    fn law(k: u32, tau: f64, idx: usize) -> PeriodicBoundaryLaw {
        let p = ModelParams::new(k, tau).unwrap();
        boundary_law_from_pair(&solve_generic(&p, 1e-12).unwrap()[idx]).unwrap()
    }

    #[test]
    fn free_law() {
        let p = ModelParams::new(2, 3.0).unwrap();
        let l = boundary_law_from_pair(&BoundaryLawPair::new(&p, 1.0, 1.0)).unwrap();
        assert_eq!(l.z, [1.0; 4]);
        assert!(check_consistency(&l, 1e-12).unwrap().max() < 1e-14);
        let s = series_sums(&l).unwrap();
        let t = l.theta;
        assert!((s.r[0] - t / (1.0 - t)).abs() < 1e-15);
    }

    #[test]
    fn pattern_by_residue() {
        let p = ModelParams::new(2, 7.0).unwrap();
        let pair = solve_generic(&p, 1e-12).unwrap().pop().unwrap();
        let l = boundary_law_from_pair(&pair).unwrap();
        assert_eq!(l.u, [1.0, pair.b, 1.0, pair.a]);
        assert_eq!(l.z_at(-1), pair.a * pair.a);
        assert_eq!(l.z_at(5), pair.b * pair.b);
    }

    #[test]
    fn solver_laws_are_consistent() {
        for (k, tau) in [(2, 5.0), (2, 7.0), (3, 5.0), (3, 3.5), (3, 12.0), (4, 6.0)] {
            let p = ModelParams::new(k, tau).unwrap();
            for pair in solve_generic(&p, 1e-12).unwrap() {
                let l = boundary_law_from_pair(&pair).unwrap();
                let rep = check_consistency(&l, 1e-12).unwrap();
                assert!(rep.max() < 1e-10, "k={k} tau={tau} {pair:?} {rep:?}");
                let mut bad = pair.clone();
                bad.a += 1e-2;
                let rep = check_consistency(&boundary_law_from_pair(&bad).unwrap(), 1e-12).unwrap();
                assert!(rep.recursion > 1e-4 && rep.series > 1e-4, "{rep:?}");
            }
        }
    }

    #[test]
    fn singular_denominator() {
        let p = ModelParams::new(2, 5.0).unwrap();
        let l = boundary_law_from_pair(&BoundaryLawPair::new(&p, 2.0, 3.0)).unwrap();
        assert!(matches!(
            check_consistency(&l, 1e-12),
            Err(Error::SingularLaw(_))
        ));
    }

    #[test]
    fn series_closed_form_matches_truncation() {
        let l = PeriodicBoundaryLaw::from_z(2, 0.2, [1.0, 3.0, 1.0, 0.25]).unwrap();
        let s = series_sums(&l).unwrap();
        for i in -9..9 {
            let (lt, rt) = truncated_tails(&l, i, 200);
            assert!((s.l_at(i) - lt).abs() < 1e-14 * lt.max(1.0), "l {i}");
            assert!((s.r_at(i) - rt).abs() < 1e-14 * rt.max(1.0), "r {i}");
            assert!((s.total_at(i) - l.g(i)).abs() < 1e-13);
        }
    }

    #[test]
    fn probe() {
        let l = PeriodicBoundaryLaw::from_z(2, 0.5, [1.0; 4]).unwrap();
        let r = normalisability_probe(&l, 100);
        assert_eq!(r.verdict, Normalisability::Divergent);
        assert!((r.slope - 27.0).abs() < 1e-9);
        let t: f64 = 0.5;
        let d = normalisability_probe_fn(|i| t.powi((i * i) as i32), t, 2, 100);
        assert_eq!(d.verdict, Normalisability::ConvergentSoFar);
        assert_eq!(
            normalisability_probe(&law(3, 5.0, 4), 10_000).verdict,
            Normalisability::Divergent
        );
    }

    #[test]
    fn kernel_rows() {
        let l = law(2, 7.0, 4);
        let kt = transition_kernel(&l, 30).unwrap();
        let mid = 30;
        assert!((kt.row_mass[mid] - 1.0).abs() < kt.tail_bound[mid]);
        for i in -5..5 {
            for j in -5..5 {
                assert_eq!(kernel_prob(&l, i, j), kernel_prob(&l, i + 4, j + 4));
            }
            let total: f64 = (-200..200).map(|j| kernel_prob(&l, i, j)).sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
        let free = PeriodicBoundaryLaw::from_z(2, 0.3, [1.0; 4]).unwrap();
        let want = 0.3f64.powi(2) * 0.7 / 1.3;
        assert!((kernel_prob(&free, 1, 3) - want).abs() < 1e-16);
    }

    #[test]
    fn identifiability() {
        let p = ModelParams::new(2, 7.0).unwrap();
        let all = solve_generic(&p, 1e-12).unwrap();
        for s in &all {
            assert_eq!(
                identifiability_check(s, &s.swapped()).unwrap(),
                Identifiability::PossiblyEqual
            );
        }
        assert_eq!(identifiability_classes(&all).unwrap(), 4);
        let other = solve_generic(&ModelParams::new(2, 5.0).unwrap(), 1e-12).unwrap();
        assert_eq!(
            identifiability_check(&all[0], &other[0]),
            Err(Error::MismatchedParameters)
        );
    }
}
