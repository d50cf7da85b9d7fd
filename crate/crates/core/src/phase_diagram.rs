//! Parameter sweeps: solution counts along τ (and over a (τ, h) grid for k = 2),
//! with count transitions refined by bisection.

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary_law::{
    critical_values, shared_root_check, solve_generic, ModelParams, PairKind,
};
use crate::error::{Error, Result};
use crate::external_field::{classify_region, enumerate_measure_candidates, Branch};
use crate::format::fmt_g17;
use crate::ggm::identifiability_classes;

/// Width to which transitions are bisected.
pub const TRANSITION_WIDTH: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub tau: f64,
    pub h: Option<f64>,
    pub k: u32,
    pub n_equal: usize,
    /// Unequal pairs, counting (a, b) and (b, a) once.
    pub n_unequal: usize,
    pub n_total: usize,
    /// Classes under the identifiability condition; bounds the number of distinct GGMs.
    pub n_ggm_upper: usize,
    /// Ordered solutions (a, b) and (b, a) counted separately.
    pub n_ordered: usize,
    pub region: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub tau: f64,
    pub left: usize,
    pub right: usize,
}

/// Parameter where the equal-pair and unequal-pair polynomials share a root; the
/// count there differs from the count just above.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalPoint {
    pub tau: f64,
    pub count: usize,
    pub shared_root: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub k: u32,
    pub points: Vec<PhasePoint>,
    pub transitions: Vec<Transition>,
    pub exceptional: Vec<ExceptionalPoint>,
}

pub fn phase_point(k: u32, tau: f64) -> Result<PhasePoint> {
    let params = ModelParams::new(k, tau)?;
    let pairs = solve_generic(&params, crate::polyroots::DEFAULT_TOL)?;
    let n_equal = pairs.iter().filter(|p| p.kind == PairKind::Equal).count();
    let n_unequal = pairs.len() - n_equal;
    Ok(PhasePoint {
        tau,
        h: None,
        k,
        n_equal,
        n_unequal,
        n_total: pairs.len(),
        n_ggm_upper: identifiability_classes(&pairs)?,
        n_ordered: n_equal + 2 * n_unequal,
        region: None,
    })
}

/// Grid cell for k = 2 with h₁ = h₂ = h. Swapped pairs give shifted laws and the same
/// gradient measures, so the GGM bound is the unordered count.
pub fn field_point(tau: f64, h: f64) -> Result<PhasePoint> {
    let sols = enumerate_measure_candidates(tau, h)?;
    let n_equal = sols.iter().filter(|s| s.branch == Branch::Equal).count();
    let n_unequal = sols
        .iter()
        .filter(|s| s.branch != Branch::Equal && s.a < s.b)
        .count();
    Ok(PhasePoint {
        tau,
        h: Some(h),
        k: 2,
        n_equal,
        n_unequal,
        n_total: n_equal + n_unequal,
        n_ggm_upper: n_equal + n_unequal,
        n_ordered: sols.len(),
        region: Some(classify_region(tau, h)?.label()),
    })
}

fn count_at(k: u32, tau: f64) -> Result<usize> {
    Ok(solve_generic(&ModelParams::new(k, tau)?, crate::polyroots::DEFAULT_TOL)?.len())
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn check_range(lo: f64, hi: f64, steps: usize) -> Result<()> {
    if !(lo > 2.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 2 < tau_min < tau_max, got [{lo}, {hi}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter("steps must be at least 2".into()));
    }
    Ok(())
}

/// Bisects the count discontinuity in (lo, hi) down to [`TRANSITION_WIDTH`].
pub fn refine_transition(k: u32, tau_lo: f64, tau_hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (tau_lo.min(tau_hi), tau_lo.max(tau_hi));
    let left = count_at(k, lo)?;
    if count_at(k, hi)? == left {
        return Err(Error::NoTransition(left));
    }
    while hi - lo >= TRANSITION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if count_at(k, mid)? == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn scan_tau(k: u32, tau_min: f64, tau_max: f64, steps: usize) -> Result<ScanResult> {
    check_range(tau_min, tau_max, steps)?;
    let points = linspace(tau_min, tau_max, steps)
        .into_par_iter()
        .map(|tau| phase_point(k, tau))
        .collect::<Result<Vec<_>>>()?;
    let transitions = points
        .par_windows(2)
        .filter(|w| w[0].n_total != w[1].n_total)
        .map(|w| {
            Ok(Transition {
                tau: refine_transition(k, w[0].tau, w[1].tau)?,
                left: w[0].n_total,
                right: w[1].n_total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut exceptional = Vec::new();
    let tau_2 = critical_values(k)?.tau_2;
    if (tau_min..=tau_max).contains(&tau_2) {
        let params = ModelParams::new(k, tau_2)?;
        if let Some(shared_root) = shared_root_check(&params) {
            exceptional.push(ExceptionalPoint {
                tau: tau_2,
                count: count_at(k, tau_2)?,
                shared_root,
            });
        }
    }
    Ok(ScanResult {
        k,
        points,
        transitions,
        exceptional,
    })
}

/// Boundary curves of the field regions at one τ: h = 4/τ and, for τ > 2√2,
/// h = τ³/(8(τ² − 8)).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionCurves {
    pub tau: f64,
    pub h_lower: f64,
    pub h_upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldScan {
    pub taus: Vec<f64>,
    pub hs: Vec<f64>,
    /// Row-major with h varying fastest.
    pub points: Vec<PhasePoint>,
    pub curves: Vec<RegionCurves>,
    pub max_ordered: usize,
    pub max_total: usize,
}

pub fn scan_tau_h(
    (tau_min, tau_max): (f64, f64),
    (h_min, h_max): (f64, f64),
    steps: usize,
) -> Result<FieldScan> {
    check_range(tau_min, tau_max, steps)?;
    if !(h_min > 0.0 && h_min < h_max && h_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < h_min < h_max, got [{h_min}, {h_max}]"
        )));
    }
    let taus = linspace(tau_min, tau_max, steps);
    let hs = linspace(h_min, h_max, steps);
    let cells: Vec<(f64, f64)> = taus
        .iter()
        .flat_map(|&t| hs.iter().map(move |&h| (t, h)))
        .collect();
    let points = cells
        .into_par_iter()
        .map(|(t, h)| field_point(t, h))
        .collect::<Result<Vec<_>>>()?;
    let curves = taus
        .iter()
        .map(|&tau| RegionCurves {
            tau,
            h_lower: 4.0 / tau,
            h_upper: (tau * tau > 8.0).then(|| tau.powi(3) / (8.0 * (tau * tau - 8.0))),
        })
        .collect();
    Ok(FieldScan {
        max_ordered: points.iter().map(|p| p.n_ordered).max().unwrap_or(0),
        max_total: points.iter().map(|p| p.n_total).max().unwrap_or(0),
        taus,
        hs,
        points,
        curves,
    })
}

/// CSV with columns `tau[,h],k,n_equal,n_unequal,n_total,n_ggm_upper,region`.
pub fn to_csv(points: &[PhasePoint]) -> String {
    let with_h = points.iter().any(|p| p.h.is_some());
    let mut out = String::from(if with_h {
        "tau,h,k,n_equal,n_unequal,n_total,n_ggm_upper,region\n"
    } else {
        "tau,k,n_equal,n_unequal,n_total,n_ggm_upper,region\n"
    });
    for p in points {
        out.push_str(&fmt_g17(p.tau));
        if with_h {
            out.push(',');
            out.push_str(&p.h.map(fmt_g17).unwrap_or_default());
        }
        out.push_str(&format!(
            ",{},{},{},{},{},{}\n",
            p.k,
            p.n_equal,
            p.n_unequal,
            p.n_total,
            p.n_ggm_upper,
            p.region.unwrap_or("")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_transitions() {
        let r = scan_tau(2, 2.1, 8.0, 120).unwrap();
        let want = [4.0, 6.0, 2.0 + 2.0 * 5f64.sqrt()];
        assert_eq!(r.transitions.len(), 3);
        for (t, w) in r.transitions.iter().zip(want) {
            assert!((t.tau - w).abs() < 1e-5, "{t:?}");
        }
        let counts: Vec<_> = r.transitions.iter().map(|t| (t.left, t.right)).collect();
        assert_eq!(counts, [(1, 2), (2, 4), (4, 5)]);
        assert!(r.points.windows(2).all(|w| w[0].n_total <= w[1].n_total));
        assert_eq!(r.exceptional.len(), 1);
        assert_eq!(r.exceptional[0].count, 4);
    }

    #[test]
    fn k2_low_tau_is_constant() {
        let r = scan_tau(2, 2.05, 3.9, 40).unwrap();
        assert!(r.transitions.is_empty());
        assert!(r
            .points
            .iter()
            .all(|p| p.n_total == 1 && p.n_ggm_upper == 1));
    }

    #[test]
    fn k3_transitions() {
        let r = scan_tau(3, 2.1, 6.0, 100).unwrap();
        let taus: Vec<f64> = r.transitions.iter().map(|t| t.tau).collect();
        // The 1 → 3 → 2 window (2.9943, 3) is narrower than the grid step, so the scan
        // sees a single 1 → 2 jump that bisects onto one of its two ends.
        assert_eq!(taus.len(), 3, "{:?}", r.transitions);
        assert!(taus[0] > 2.9942 && taus[0] < 3.00001, "{taus:?}");
        assert!((taus[1] - 4.0).abs() < 1e-5);
        assert!((taus[2] - 3.0 * 2f64.sqrt()).abs() < 1e-5);
        let fine = scan_tau(3, 2.99, 3.01, 41).unwrap();
        let counts: Vec<_> = fine.transitions.iter().map(|t| (t.left, t.right)).collect();
        assert_eq!(counts, [(1, 3), (3, 2)]);
        assert!((fine.transitions[0].tau - 2.99428).abs() < 1e-4);
        assert!((fine.transitions[1].tau - 3.0).abs() < 1e-5);
    }

    #[test]
    fn refine_errors_without_change() {
        assert!(matches!(
            refine_transition(2, 2.5, 3.5),
            Err(Error::NoTransition(1))
        ));
        let t = refine_transition(2, 6.3, 6.6).unwrap();
        assert!((t - (2.0 + 2.0 * 5f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn field_grid_h1_row_matches_zero_field() {
        let g = scan_tau_h((2.5, 9.0), (0.5, 1.5), 9).unwrap();
        assert!(g.max_ordered <= 7);
        for p in g.points.iter().filter(|p| p.h == Some(1.0)) {
            let z = phase_point(2, p.tau).unwrap();
            assert_eq!(
                (p.n_equal, p.n_unequal, p.n_ordered),
                (z.n_equal, z.n_unequal, z.n_ordered)
            );
        }
        assert_eq!(g.curves[0].h_lower, 4.0 / 2.5);
    }

    #[test]
    fn deterministic_and_csv() {
        let a = scan_tau(2, 3.0, 7.0, 30).unwrap();
        let b = scan_tau(2, 3.0, 7.0, 30).unwrap();
        assert_eq!(a, b);
        let csv = to_csv(&a.points);
        assert!(csv.starts_with("tau,k,n_equal,n_unequal,n_total,n_ggm_upper,region\n"));
        assert_eq!(csv.lines().count(), 31);
        let g = scan_tau_h((3.0, 8.0), (0.5, 2.0), 3).unwrap();
        let csv = to_csv(&g.points);
        assert!(csv.starts_with("tau,h,k,"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",neither"));
    }
}
