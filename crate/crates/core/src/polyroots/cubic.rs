//! Closed-form real roots of a cubic via the depressed form t³ + p t + q.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative width of the band around Δ = 0 treated as the repeated-root case.
const DELTA_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiscriminantCase {
    /// Δ > 0: one real root.
    OneReal,
    /// Δ = 0: a simple root and a double root (or a triple root when p = q = 0).
    Repeated,
    /// Δ < 0: three distinct real roots.
    ThreeReal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicRoot {
    pub value: f64,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicSolution {
    pub p: f64,
    pub q: f64,
    pub discriminant: f64,
    pub case: DiscriminantCase,
    /// Distinct real roots in ascending order.
    pub roots: Vec<CubicRoot>,
}

impl CubicSolution {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

/// Real roots of a3 x³ + a2 x² + a1 x + a0.
pub fn solve_cubic(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<CubicSolution> {
    if a3 == 0.0 || !a3.is_finite() {
        return Err(Error::NotCubic);
    }
    let (b, c, d) = (a2 / a3, a1 / a3, a0 / a3);
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let delta = q * q / 4.0 + p * p * p / 27.0;
    let scale = q * q / 4.0 + (p * p * p).abs() / 27.0;

    let (case, ts) = if delta.abs() <= DELTA_REL_TOL * scale || scale == 0.0 {
        if p == 0.0 || scale == 0.0 {
            (DiscriminantCase::Repeated, vec![(0.0, 3)])
        } else {
            (
                DiscriminantCase::Repeated,
                vec![(3.0 * q / p, 1), (-3.0 * q / (2.0 * p), 2)],
            )
        }
    } else if delta > 0.0 {
        // A − p/(3A) with A taken on the side that avoids cancellation.
        let sd = delta.sqrt();
        let a = -q.signum() * (q.abs() / 2.0 + sd).cbrt();
        let t = if a == 0.0 { 0.0 } else { a - p / (3.0 * a) };
        (DiscriminantCase::OneReal, vec![(t, 1)])
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let ts = (0..3)
            .map(|j| (m * (phi - 2.0 * PI * j as f64 / 3.0).cos(), 1))
            .collect();
        (DiscriminantCase::ThreeReal, ts)
    };
    let mut roots: Vec<CubicRoot> = ts
        .into_iter()
        .map(|(t, m)| CubicRoot {
            value: if m == 1 {
                polish([a3, a2, a1, a0], t + shift)
            } else {
                t + shift
            },
            multiplicity: m,
        })
        .collect();
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(CubicSolution {
        p,
        q,
        discriminant: delta,
        case,
        roots,
    })
}

/// One Newton step, kept only when it lowers the residual.
fn polish(c: [f64; 4], x: f64) -> f64 {
    let f = |x: f64| ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
    let df = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
    if df == 0.0 {
        return x;
    }
    let y = x - f(x) / df;
    if y.is_finite() && f(y).abs() < f(x).abs() {
        y
    } else {
        x
    }
}
