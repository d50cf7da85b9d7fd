//! Zero-field 4-periodic boundary laws.
//!
//! A law is described by a pair (a, b) solving
//!
//! ```text
//! (a + b - τ) b^k + τ b - 2 = 0
//! (a + b - τ) a^k + τ a - 2 = 0
//! ```
//!
//! Equal pairs a = b are the positive roots of Q(a) = 2a^{k+1} - τa^k + τa - 2.
//! Unequal pairs come from the positive roots of U, the cofactor of Q in the
//! elimination polynomial obtained from a = f(f(a)).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyroots::{isolate_positive_roots, rat, solve_quartic_ferrari, RealPolynomial};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub k: u32,
    pub tau: f64,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_j: Option<f64>,
    #[serde(skip)]
    tau_exact: BigRational,
}

impl ModelParams {
    pub fn new(k: u32, tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau must be finite, got {tau}"
            )));
        }
        Self::build(k, tau, rat(tau))
    }

    /// Parameters with an exact rational τ; all polynomial algebra is then exact in τ.
    pub fn exact(k: u32, tau: BigRational) -> Result<Self> {
        let t = tau.to_f64().unwrap_or(f64::NAN);
        Self::build(k, t, tau)
    }

    fn build(k: u32, tau: f64, tau_exact: BigRational) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "k must be at least 2, got {k}"
            )));
        }
        if tau_exact <= BigRational::from_integer(2.into()) {
            return Err(Error::InvalidParameter(format!(
                "tau must exceed 2, got {tau}"
            )));
        }
        let theta = 2.0 / (tau + (tau * tau - 4.0).sqrt());
        Ok(Self {
            k,
            tau,
            theta,
            beta_j: Some(-theta.ln()),
            tau_exact,
        })
    }

    pub fn tau_exact(&self) -> &BigRational {
        &self.tau_exact
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Equal,
    Unequal,
}

/// A positive solution of the boundary-law system. Unequal pairs are stored with a < b;
/// (b, a) is the same unordered solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryLawPair {
    pub a: f64,
    pub b: f64,
    pub params: ModelParams,
    pub residuals: [f64; 2],
    pub kind: PairKind,
}

impl BoundaryLawPair {
    pub fn new(params: &ModelParams, a: f64, b: f64) -> Self {
        let kind = if a == b {
            PairKind::Equal
        } else {
            PairKind::Unequal
        };
        Self {
            a,
            b,
            residuals: residuals(params.k, params.tau, a, b),
            params: params.clone(),
            kind,
        }
    }

    pub fn swapped(&self) -> Self {
        Self::new(&self.params, self.b, self.a)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals[0].abs().max(self.residuals[1].abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalValues {
    pub k: u32,
    pub tau_c: f64,
    pub tau_1: f64,
    pub tau_2: f64,
    /// First and last change in the number of unequal pairs of the k = 3 radical solver.
    pub tau_cr_1: Option<f64>,
    pub tau_cr_2: Option<f64>,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn binomial(n: u32, r: u32) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Both left-hand sides of the zero-field system at (a, b).
pub fn residuals(k: u32, tau: f64, a: f64, b: f64) -> [f64; 2] {
    let s = a + b - tau;
    [
        s * b.powi(k as i32) + tau * b - 2.0,
        s * a.powi(k as i32) + tau * a - 2.0,
    ]
}

/// Q(a) = 2a^{k+1} − τa^k + τa − 2.
pub fn build_q(params: &ModelParams) -> RealPolynomial {
    let k = params.k as usize;
    let t = params.tau_exact();
    let mut c = vec![BigRational::zero(); k + 2];
    c[0] = int(-2);
    c[1] += t;
    c[k] -= t;
    c[k + 1] = int(2);
    RealPolynomial::exact(c)
}

/// Q(a)/(a − 1) = 2a^k + (2 − τ)(a^{k−1} + … + a) + 2.
pub fn build_reduced(params: &ModelParams) -> RealPolynomial {
    let (q, _) = build_q(params)
        .divide_exact(&RealPolynomial::from_i64s(&[-1, 1]))
        .expect("exact division by a - 1");
    q
}

/// U(a) = τa^{k²} − (2 − τa) Σ_{j<k} (−1)^{k−j} C(k,j) a^{(k+1)j} Q^{k−j−1}.
pub fn build_u(params: &ModelParams) -> RealPolynomial {
    let k = params.k;
    let t = params.tau_exact().clone();
    let q = build_q(params);
    let two_minus_ta = RealPolynomial::exact(vec![int(2), -t.clone()]);
    let mut sum = RealPolynomial::zero();
    for j in 0..k {
        let sign = if (k - j).is_multiple_of(2) { 1 } else { -1 };
        let coef = BigRational::from_integer(binomial(k, j) * sign);
        let term = q.pow(k - j - 1).shift(((k + 1) * j) as usize).scale(&coef);
        sum = &sum + &term;
    }
    &RealPolynomial::monomial(t, (k * k) as usize) - &(&two_minus_ta * &sum)
}

/// P(a) = (2 − τa)[2 − τa + τa^k − a^{k+1}]^k − a^{k²}[τa^{k+1} + (2 − τ²)a^k + τ²a − 2τ],
/// the numerator of a − f(f(a)). It factors as P = −Q·U.
pub fn build_p(params: &ModelParams) -> RealPolynomial {
    let k = params.k as usize;
    let t = params.tau_exact().clone();
    let t2 = &t * &t;
    let mut inner = vec![BigRational::zero(); k + 2];
    inner[0] = int(2);
    inner[1] -= &t;
    inner[k] += &t;
    inner[k + 1] -= int(1);
    let inner = RealPolynomial::exact(inner).pow(k as u32);
    let two_minus_ta = RealPolynomial::exact(vec![int(2), -t.clone()]);
    let mut tail = vec![BigRational::zero(); k + 2];
    tail[0] = -(int(2) * &t);
    tail[1] += &t2;
    tail[k] += int(2) - &t2;
    tail[k + 1] += &t;
    let tail = RealPolynomial::exact(tail).shift(k * k);
    &(&two_minus_ta * &inner) - &tail
}

/// The explicit degree-8 polynomial of the k = 3 case.
pub fn build_g(tau: &BigRational) -> RealPolynomial {
    let t = tau.clone();
    let t2 = &t * &t;
    let c = vec![
        int(8),
        -(int(12) * &t),
        int(6) * &t2,
        -((&t2 - int(8)) * &t),
        -(int(4) * (int(2) * &t2 + int(1))),
        int(2) * (&t2 + int(2)) * &t,
        t2.clone(),
        -((&t2 + int(2)) * &t),
        &t2 + int(2),
    ];
    RealPolynomial::exact(c)
}

/// Fixed-point form a = Y(a, τ) of g(a, τ) = 0 for k = 3.
pub fn y_map(a: f64, tau: f64) -> f64 {
    let t2 = tau * tau;
    let num = (t2 + 2.0) * tau * a.powi(7)
        + 4.0 * (2.0 * t2 + 1.0) * a.powi(4)
        + (t2 - 8.0) * tau * a.powi(3)
        + 13.0 * tau * a
        - 8.0;
    let den = (t2 + 2.0) * a.powi(7)
        + t2 * a.powi(5)
        + 2.0 * (t2 + 2.0) * tau * a.powi(4)
        + 6.0 * t2 * a
        + tau;
    num / den
}

/// ψ_k(a) = 2 + 2(a^k + 1)/(a^{k−1} + … + a); τ = ψ_k(a) parametrises the equal pairs.
pub fn psi(params: &ModelParams, a: f64) -> Result<f64> {
    psi_k(params.k, a)
}

pub fn psi_k(k: u32, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("psi needs a > 0, got {a}")));
    }
    let den: f64 = (1..k as i32).map(|i| a.powi(i)).sum();
    Ok(2.0 + 2.0 * (a.powi(k as i32) + 1.0) / den)
}

/// f(b) = τ − b + (2 − τb) b^{−k}; may be non-positive.
pub fn f_map(params: &ModelParams, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("f needs b > 0, got {b}")));
    }
    let tau = params.tau;
    Ok(tau - b + (2.0 - tau * b) * b.powi(-(params.k as i32)))
}

/// (k−1)^k τ^{k+1} − (k−1) 2^{k−1} k^k τ² + (2k)^{k+1} and the sum of its term magnitudes.
fn ha_value(k: u32, tau: f64) -> (f64, f64) {
    let kf = k as f64;
    let terms = [
        (kf - 1.0).powi(k as i32) * tau.powi(k as i32 + 1),
        -(kf - 1.0) * 2f64.powi(k as i32 - 1) * kf.powi(k as i32) * tau * tau,
        (2.0 * kf).powi(k as i32 + 1),
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// â = 2k/(τ(k−1)) when Q and U share that root at this τ, else `None`.
pub fn shared_root_check(params: &ModelParams) -> Option<f64> {
    let (v, scale) = ha_value(params.k, params.tau);
    (v.abs() <= 1e-10 * scale)
        .then(|| 2.0 * params.k as f64 / (params.tau * (params.k as f64 - 1.0)))
}

/// The polynomial whose unique positive root L* gives τ₂ = (L* + 2k)/(k − 1).
pub fn build_l(k: u32) -> RealPolynomial {
    let two_k = BigInt::from(2 * k);
    let mut c = vec![BigRational::zero(); k as usize + 1];
    for j in 0..=k.saturating_sub(2) {
        c[(k - j) as usize] += BigRational::from_integer(
            binomial(k + 1, j) * num_traits::pow(two_k.clone(), j as usize),
        );
    }
    c[1] += BigRational::from_integer(
        BigInt::from(k * (k - 1) / 2) * num_traits::pow(two_k.clone(), (k - 1) as usize),
    );
    c[0] -= BigRational::from_integer(BigInt::from(k - 1) * num_traits::pow(two_k, k as usize));
    RealPolynomial::exact(c)
}

pub fn critical_values(k: u32) -> Result<CriticalValues> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let kf = k as f64;
    let roots = isolate_positive_roots(&build_l(k), 1e-14)?;
    let l_star = roots
        .roots
        .last()
        .map(|r| r.value)
        .ok_or_else(|| Error::Domain("no positive root for tau_2".into()))?;
    let (tau_cr_1, tau_cr_2) = if k == 3 {
        let (a, b) = k3_transitions()?;
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    Ok(CriticalValues {
        k,
        tau_c: 2.0 * (kf + 1.0) / (kf - 1.0),
        tau_1: 2.0 * kf / (kf - 1.0),
        tau_2: (l_star + 2.0 * kf) / (kf - 1.0),
        tau_cr_1,
        tau_cr_2,
    })
}

fn k3_count(tau: f64) -> usize {
    solve_k3(tau, 1e-12).map(|v| v.len()).unwrap_or(0)
}

fn bisect_count(mut lo: f64, mut hi: f64, count: impl Fn(f64) -> usize) -> f64 {
    let c_lo = count(lo);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if count(mid) == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First and last τ where the number of k = 3 unequal pairs changes.
fn k3_transitions() -> Result<(f64, f64)> {
    let grid: Vec<f64> = (1..=400).map(|i| 2.0 + i as f64 * 0.02).collect();
    let counts: Vec<usize> = grid.iter().map(|&t| k3_count(t)).collect();
    let changes: Vec<usize> = (1..grid.len())
        .filter(|&i| counts[i] != counts[i - 1])
        .collect();
    let (first, last) = match (changes.first(), changes.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::NoTransition(counts[0])),
    };
    Ok((
        bisect_count(grid[first - 1], grid[first], k3_count),
        bisect_count(grid[last - 1], grid[last], k3_count),
    ))
}

/// Magnitude of the terms in the residuals, for relative acceptance thresholds.
pub fn residual_scale(k: u32, tau: f64, a: f64, b: f64) -> f64 {
    let m = a.max(b);
    (a + b + tau) * m.powi(k as i32) + tau * m + 2.0
}

/// Newton polish of an approximate solution of the two-equation system.
fn polish(k: u32, tau: f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ki = k as i32;
    let kf = k as f64;
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = residuals(k, tau, a, b);
    for _ in 0..8 {
        let s = a + b - tau;
        let (bk, ak) = (b.powi(ki), a.powi(ki));
        let j11 = bk;
        let j12 = bk + kf * s * b.powi(ki - 1) + tau;
        let j21 = ak + kf * s * a.powi(ki - 1) + tau;
        let j22 = ak;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = (r[0] * j22 - r[1] * j12) / det;
        let db = (j11 * r[1] - j21 * r[0]) / det;
        let (na, nb) = (a - da, b - db);
        let nr = residuals(k, tau, na, nb);
        if !(na > 0.0 && nb > 0.0) || norm(nr) >= norm(r) {
            break;
        }
        (a, b, r) = (na, nb, nr);
    }
    (a, b)
}

/// All positive solutions for general k: equal pairs from Q, unequal pairs from U.
pub fn solve_generic(params: &ModelParams, tol: f64) -> Result<Vec<BoundaryLawPair>> {
    let (k, tau) = (params.k, params.tau);
    let accept = |a: f64, b: f64| {
        let r = residuals(k, tau, a, b);
        let lim = tol * residual_scale(k, tau, a, b);
        r[0].abs() < lim && r[1].abs() < lim
    };
    let q_roots = isolate_positive_roots(&build_q(params), tol)?.values();
    let mut out: Vec<BoundaryLawPair> = q_roots
        .iter()
        .filter(|&&a| accept(a, a))
        .map(|&a| BoundaryLawPair::new(params, a, a))
        .collect();

    let shared = shared_root_check(params);
    let near_q = |a: f64| {
        q_roots.iter().any(|&q| (a - q).abs() < 1e-9)
            || shared.is_some_and(|h| (a - h).abs() < 1e-6)
    };
    let mut unequal: Vec<(f64, f64)> = Vec::new();
    for a0 in isolate_positive_roots(&build_u(params), tol)?.values() {
        if near_q(a0) {
            continue;
        }
        let b0 = f_map(params, a0)?;
        if !(b0 > tol) {
            continue;
        }
        let (a, b) = polish(k, tau, a0, b0);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if (b - a) <= 1e-9 * b || near_q(a) || near_q(b) || !accept(a, b) {
            continue;
        }
        if unequal
            .iter()
            .all(|&(x, y)| (x - a).abs() > 1e-9 || (y - b).abs() > 1e-9)
        {
            unequal.push((a, b));
        }
    }
    unequal.sort_by(|x, y| x.0.total_cmp(&y.0));
    out.extend(
        unequal
            .into_iter()
            .map(|(a, b)| BoundaryLawPair::new(params, a, b)),
    );
    Ok(out)
}

/// Unequal pairs for k = 3 from the closed-form route: a + b is a root of
/// x⁴ − τx³ + τx + 2, ab = x² + τ/(x − τ), and a, b solve t² − xt + ab = 0.
pub fn solve_k3(tau: f64, tol: f64) -> Result<Vec<BoundaryLawPair>> {
    let params = ModelParams::new(3, tau)?;
    let quartic = solve_quartic_ferrari(tau)?;
    let mut out = Vec::new();
    for &x in &quartic.roots {
        if !(x > 0.0) {
            continue;
        }
        let ab = x * x + tau / (x - tau);
        let rad = x * x - 4.0 * ab;
        if rad < -tol {
            continue;
        }
        let sq = rad.max(0.0).sqrt();
        let (a, b) = ((x - sq) / 2.0, (x + sq) / 2.0);
        if a > 0.0 && b - a > 1e-6 {
            out.push(BoundaryLawPair::new(&params, a, b));
        }
    }
    out.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(out)
}

/// Number of distinct positive solutions, counting (a, b) and (b, a) once.
pub fn count_solutions(params: &ModelParams) -> Result<usize> {
    Ok(solve_generic(params, crate::polyroots::DEFAULT_TOL)?.len())
}
