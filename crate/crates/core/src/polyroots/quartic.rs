//! Ferrari solution of the quartic x⁴ − τx³ + τx + 2 = 0 that governs a + b for k = 3.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ResolventCase {
    /// D > 0: the resolvent has one real root, c = S + T.
    OneReal,
    /// D = 0: S = T.
    Repeated,
    /// D < 0: three real roots; c is the largest, taken from the trigonometric form.
    ThreeReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuarticSolution {
    pub tau: f64,
    /// Resolvent z³ − (τ²+8)z − 3τ² written as z³ + 3F z − 2R.
    pub f: f64,
    pub r: f64,
    pub d: f64,
    pub case: ResolventCase,
    /// Cardano radicals; `None` in the trigonometric case.
    pub s: Option<f64>,
    pub t: Option<f64>,
    /// Largest real root of the resolvent.
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Radicand of the second factor x² − (α+τ/2)x + c/2 + β.
    pub radicand: f64,
    /// Real roots of the second factor, x₁ ≥ x₂; empty when the radicand is negative.
    pub roots: Vec<f64>,
    /// Real roots of the first factor x² + (α−τ/2)x + c/2 − β.
    pub first_factor_roots: Vec<f64>,
    /// True when the first factor has no positive real root.
    pub first_factor_certified: bool,
}

pub fn solve_quartic_ferrari(tau: f64) -> Result<QuarticSolution> {
    if !(tau > 2.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("quartic needs tau > 2, got {tau}")));
    }
    let t2 = tau * tau;
    let f = -(t2 + 8.0) / 3.0;
    let r = 1.5 * t2;
    let d = f * f * f + r * r;
    let (case, s, t, c) = if d >= 0.0 {
        let sd = d.sqrt();
        let s = (r + sd).cbrt();
        let t = (r - sd).cbrt();
        let case = if d == 0.0 {
            ResolventCase::Repeated
        } else {
            ResolventCase::OneReal
        };
        (case, Some(s), Some(t), s + t)
    } else {
        let m = (-f).sqrt();
        let phi = (r / (m * m * m)).clamp(-1.0, 1.0).acos() / 3.0;
        let c = 2.0 * m * phi.cos();
        debug_assert!(c >= 2.0 * m * (phi - 2.0 * PI / 3.0).cos());
        (ResolventCase::ThreeReal, None, None, c)
    };
    let alpha = (t2 / 4.0 + c).sqrt();
    let beta = (c * c / 4.0 - 2.0).sqrt();

    let quad_roots = |lin: f64, cst: f64| -> Vec<f64> {
        let disc = lin * lin - 4.0 * cst;
        if disc < 0.0 {
            Vec::new()
        } else {
            let sq = disc.sqrt();
            vec![(-lin + sq) / 2.0, (-lin - sq) / 2.0]
        }
    };
    let lin2 = alpha + tau / 2.0;
    let radicand = lin2 * lin2 - 2.0 * c - 4.0 * beta;
    let roots = if radicand < 0.0 {
        Vec::new()
    } else {
        let sq = radicand.sqrt();
        vec![(lin2 + sq) / 2.0, (lin2 - sq) / 2.0]
    };
    let first_factor_roots = quad_roots(alpha - tau / 2.0, c / 2.0 - beta);
    let first_factor_certified = first_factor_roots.iter().all(|&x| x <= 0.0);
    Ok(QuarticSolution {
        tau,
        f,
        r,
        d,
        case,
        s,
        t,
        c,
        alpha,
        beta,
        radicand,
        roots,
        first_factor_roots,
        first_factor_certified,
    })
}

pub fn quartic_value(tau: f64, x: f64) -> f64 {
    (((x - tau) * x) * x + tau) * x + 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_onset_has_no_real_roots() {
        let s = solve_quartic_ferrari(2.5).unwrap();
        assert!(s.radicand < 0.0);
        assert!(s.roots.is_empty());
    }

    #[test]
    fn resolvent_discriminant_positive_at_four() {
        let s = solve_quartic_ferrari(4.0).unwrap();
        assert!(s.d > 0.0);
        assert_eq!(s.case, ResolventCase::OneReal);
        assert!(s.c > 0.0);
    }

    #[test]
    fn resolvent_switches_to_trig_form_for_large_tau() {
        let s = solve_quartic_ferrari(6.0).unwrap();
        assert!(s.d < 0.0);
        assert_eq!(s.case, ResolventCase::ThreeReal);
        let c = s.c;
        assert!((c.powi(3) - 44.0 * c - 108.0).abs() < 1e-9);
    }

    #[test]
    fn roots_at_five_have_small_residuals() {
        let s = solve_quartic_ferrari(5.0).unwrap();
        assert_eq!(s.roots.len(), 2);
        assert!(s.roots[0] > s.roots[1] && s.roots[1] > 0.0);
        for &x in &s.roots {
            assert!(quartic_value(5.0, x).abs() < 1e-10);
        }
        assert!(s.first_factor_certified);
    }

    #[test]
    fn rejects_tau_at_most_two() {
        assert!(solve_quartic_ferrari(2.0).is_err());
    }
}
