//! Boundary laws under a 4-periodic external field (1, h₁, 1, h₂).
//!
//! The pair (a, b) now solves
//!
//! ```text
//! (a + b - τ) h₂ b^k + τ b - 2 = 0
//! (a + b - τ) h₁ a^k + τ a - 2 = 0
//! ```
//!
//! For k = 2 and h₁ = h₂ = h the difference of the two equations factors as
//! (b − a)[h(a + b)² − hτ(a + b) + τ], giving an a = b cubic and two branches
//! with prescribed a + b, all solved in closed form.

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary_law::ModelParams;
use crate::error::{Error, Result};
use crate::polyroots::{isolate_positive_roots, rat, solve_cubic, RealPolynomial};

/// Solutions closer than this in both coordinates are the same solution.
pub const DEDUP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldParams {
    pub base: ModelParams,
    pub h1: f64,
    pub h2: f64,
}

impl FieldParams {
    pub fn new(k: u32, tau: f64, h1: f64, h2: f64) -> Result<Self> {
        Self::with_base(ModelParams::new(k, tau)?, h1, h2)
    }

    pub fn with_base(base: ModelParams, h1: f64, h2: f64) -> Result<Self> {
        if !(h1 > 0.0 && h2 > 0.0) || !h1.is_finite() || !h2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field values must be positive, got h1={h1}, h2={h2}"
            )));
        }
        Ok(Self { base, h1, h2 })
    }

    pub fn k(&self) -> u32 {
        self.base.k
    }

    pub fn tau(&self) -> f64 {
        self.base.tau
    }

    /// Field value h(i) at height residue i.
    pub fn field_at(&self, i: i64) -> f64 {
        match i.rem_euclid(4) {
            1 => self.h2,
            3 => self.h1,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Equal,
    SumPlus,
    SumMinus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSolution {
    pub a: f64,
    pub b: f64,
    pub branch: Branch,
    /// 1..=3 for the a = b cubic roots (ascending), 4/5 and 6/7 for the sum branches,
    /// 0 for solutions found by the generic solvers.
    pub index: u8,
    pub residuals: [f64; 2],
    pub params: FieldParams,
}

impl FieldSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals[0].abs().max(self.residuals[1].abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegionTag {
    pub in_a: bool,
    pub in_b: bool,
    /// (τ, h) lies on one of the curves h = 4/τ, h = τ³/(8(τ²−8)).
    pub boundary: bool,
}

impl RegionTag {
    pub fn label(&self) -> &'static str {
        match (self.in_a, self.in_b) {
            (true, true) => "A+B",
            (true, false) => "A",
            (false, true) => "B",
            (false, false) => "neither",
        }
    }
}

/// Both left-hand sides of the field system at (a, b).
pub fn residuals_abd(fp: &FieldParams, a: f64, b: f64) -> Result<[f64; 2]> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("need a, b > 0, got ({a}, {b})")));
    }
    Ok(raw_residuals(fp, a, b))
}

fn raw_residuals(fp: &FieldParams, a: f64, b: f64) -> [f64; 2] {
    let (k, tau) = (fp.k() as i32, fp.tau());
    let s = a + b - tau;
    [
        s * fp.h2 * b.powi(k) + tau * b - 2.0,
        s * fp.h1 * a.powi(k) + tau * a - 2.0,
    ]
}

/// Magnitude of the terms in the residuals, for relative acceptance thresholds.
pub fn residual_scale(fp: &FieldParams, a: f64, b: f64) -> f64 {
    let k = fp.k() as i32;
    let tau = fp.tau();
    let m = fp.h1.max(fp.h2) * a.max(b).powi(k);
    (a + b + tau) * m + tau * a.max(b) + 2.0
}

/// Exact membership in the regions where the two sum branches have real solutions.
pub fn classify_region(tau: f64, h: f64) -> Result<RegionTag> {
    if !(tau > 2.0) || !(h > 0.0) || !tau.is_finite() || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need tau > 2 and h > 0, got ({tau}, {h})"
        )));
    }
    let t = rat(tau);
    let hq = rat(h);
    let four = BigRational::from_integer(4.into());
    let eight = BigRational::from_integer(8.into());
    let t2 = &t * &t;
    // h·τ vs 4 and 8h(τ²−8) vs τ³, both exact.
    let ht = (&hq * &t - &four).signum_i8();
    let cubic = if t2 > eight {
        Some((&eight * &hq * (&t2 - &eight) - &t2 * &t).signum_i8())
    } else {
        None
    };
    let tau_ge_4 = t >= four;
    let in_a = if tau_ge_4 {
        ht >= 0
    } else {
        cubic.is_some_and(|c| c >= 0)
    };
    let in_b = tau_ge_4 && ht >= 0 && cubic.is_some_and(|c| c <= 0);
    let boundary = ht == 0 || cubic == Some(0);
    Ok(RegionTag {
        in_a,
        in_b,
        boundary,
    })
}

trait SignumI8 {
    fn signum_i8(&self) -> i8;
}

impl SignumI8 for BigRational {
    fn signum_i8(&self) -> i8 {
        if self.is_zero() {
            0
        } else if *self > BigRational::zero() {
            1
        } else {
            -1
        }
    }
}

/// Real roots of the a = b cubic 2ha³ − hτa² + τa − 2 = 0, ascending.
pub fn equal_branch_roots(tau: f64, h: f64) -> Result<Vec<f64>> {
    Ok(solve_cubic(2.0 * h, -h * tau, tau, -2.0)?.values())
}

/// Closed-form solutions for k = 2 with h₁ = h₂ = h, before deduplication.
pub fn solve_k2_uniform(tau: f64, h: f64, tol: f64) -> Result<Vec<FieldSolution>> {
    let fp = FieldParams::new(2, tau, h, h)?;
    let region = classify_region(tau, h)?;
    let mut out = Vec::new();
    let mut push = |a: f64, b: f64, branch: Branch, index: u8| {
        if !(a > 0.0 && b > 0.0) {
            return;
        }
        let r = raw_residuals(&fp, a, b);
        let lim = 1e-8 * residual_scale(&fp, a, b);
        if r[0].abs() <= lim && r[1].abs() <= lim {
            out.push(FieldSolution {
                a,
                b,
                branch,
                index,
                residuals: r,
                params: fp.clone(),
            });
        }
    };
    for (i, a) in equal_branch_roots(tau, h)?.into_iter().enumerate() {
        push(a, a, Branch::Equal, i as u8 + 1);
    }
    let ht = h * tau;
    if region.in_a || region.in_b {
        let sd = (ht * (ht - 4.0)).max(0.0).sqrt();
        let branch = |sign: f64, live: bool, first: u8, tag: Branch| {
            if !live {
                return None;
            }
            let den = ht - sign * sd;
            let rad = tau * tau - 4.0 * ht + sign * 4.0 * sd;
            if rad < -tol {
                return None;
            }
            let sq = rad.max(0.0).sqrt();
            let (lo, hi) = ((tau - sq) / den, (tau + sq) / den);
            Some([(lo, hi, tag, first), (hi, lo, tag, first + 1)])
        };
        let plus = branch(1.0, region.in_a, 4, Branch::SumPlus);
        let minus = branch(-1.0, region.in_b, 6, Branch::SumMinus);
        for (a, b, tag, idx) in plus.into_iter().chain(minus).flatten() {
            push(a, b, tag, idx);
        }
    }
    Ok(out)
}

/// Distinct solutions (ordered pairs) for k = 2, uniform field; at most seven.
pub fn enumerate_measure_candidates(tau: f64, h: f64) -> Result<Vec<FieldSolution>> {
    Ok(dedup(solve_k2_uniform(
        tau,
        h,
        crate::polyroots::DEFAULT_TOL,
    )?))
}

fn dedup(all: Vec<FieldSolution>) -> Vec<FieldSolution> {
    let mut out: Vec<FieldSolution> = Vec::new();
    for s in all {
        if out
            .iter()
            .all(|o| (o.a - s.a).abs() > DEDUP_TOL || (o.b - s.b).abs() > DEDUP_TOL)
        {
            out.push(s);
        }
    }
    out
}

/// Elimination polynomial in a: b = N/(h₁a^k) with N = h₁a^k(τ − a) + 2 − τa, and
/// (2 − τa) h₂ N^k + τ N h₁^k a^{k²} − 2 h₁^{k+1} a^{k²+k} = 0.
pub fn field_elimination_polynomial(fp: &FieldParams) -> RealPolynomial {
    let k = fp.k() as usize;
    let t = fp.base.tau_exact().clone();
    let (h1, h2) = (rat(fp.h1), rat(fp.h2));
    let mut n = vec![BigRational::zero(); k + 2];
    n[0] = BigRational::from_integer(2.into());
    n[1] = -t.clone();
    n[k] += &h1 * &t;
    n[k + 1] -= &h1;
    let n = RealPolynomial::exact(n);
    let two_minus_ta = RealPolynomial::exact(vec![BigRational::from_integer(2.into()), -t.clone()]);
    let h1k = num_traits::pow(h1.clone(), k);
    let first = (&two_minus_ta * &n.pow(k as u32)).scale(&h2);
    let second = n.shift(k * k).scale(&(&t * &h1k));
    let third =
        RealPolynomial::monomial(BigRational::from_integer(2.into()) * &h1k * &h1, k * k + k);
    &(&first + &second) - &third
}

fn tag_generic(fp: &FieldParams, a: f64, b: f64) -> FieldSolution {
    FieldSolution {
        a,
        b,
        branch: if (a - b).abs() <= DEDUP_TOL {
            Branch::Equal
        } else {
            Branch::SumPlus
        },
        index: 0,
        residuals: raw_residuals(fp, a, b),
        params: fp.clone(),
    }
}

/// All positive solutions via exact elimination and root isolation. Branch tags on
/// unequal pairs are only meaningful for k = 2, h₁ = h₂ and are fixed by [`classify_branch`].
pub fn solve_field_elimination(fp: &FieldParams, tol: f64) -> Result<Vec<FieldSolution>> {
    let k = fp.k() as i32;
    let tau = fp.tau();
    let mut out = Vec::new();
    for a in isolate_positive_roots(&field_elimination_polynomial(fp), tol)?.values() {
        let b = (fp.h1 * a.powi(k) * (tau - a) + 2.0 - tau * a) / (fp.h1 * a.powi(k));
        if !(b > tol) {
            continue;
        }
        let (a, b) = newton(fp, a, b).unwrap_or((a, b));
        let r = raw_residuals(fp, a, b);
        let lim = 1e-8 * residual_scale(fp, a, b);
        if r[0].abs() <= lim && r[1].abs() <= lim {
            out.push(classify_branch(tag_generic(fp, a, b)));
        }
    }
    Ok(dedup(out))
}

/// Damped Newton on the field system; `None` if it leaves the positive quadrant or stalls.
fn newton(fp: &FieldParams, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    let k = fp.k() as i32;
    let kf = k as f64;
    let tau = fp.tau();
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = raw_residuals(fp, a, b);
    for _ in 0..100 {
        if norm(r) <= 1e-15 * residual_scale(fp, a, b) {
            break;
        }
        let s = a + b - tau;
        let j11 = fp.h2 * b.powi(k);
        let j12 = fp.h2 * (b.powi(k) + kf * s * b.powi(k - 1)) + tau;
        let j21 = fp.h1 * (a.powi(k) + kf * s * a.powi(k - 1)) + tau;
        let j22 = fp.h1 * a.powi(k);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let da = (r[0] * j22 - r[1] * j12) / det;
        let db = (j11 * r[1] - j21 * r[0]) / det;
        let mut step = 1.0;
        loop {
            let (na, nb) = (a - step * da, b - step * db);
            if na > 0.0 && nb > 0.0 {
                let nr = raw_residuals(fp, na, nb);
                if norm(nr) < norm(r) {
                    (a, b, r) = (na, nb, nr);
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-10 {
                return (norm(r) <= 1e-9 * residual_scale(fp, a, b)).then_some((a, b));
            }
        }
    }
    Some((a, b))
}

/// Multistart damped Newton from `starts` seeded points in (0, τ)².
pub fn solve_field_multistart(fp: &FieldParams, starts: usize, seed: u64) -> Vec<FieldSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = fp.tau();
    let mut found = Vec::new();
    for _ in 0..starts {
        let a0 = rng.gen_range(0.0..tau).max(1e-3);
        let b0 = rng.gen_range(0.0..tau).max(1e-3);
        if let Some((a, b)) = newton(fp, a0, b0) {
            let r = raw_residuals(fp, a, b);
            let lim = 1e-10 * residual_scale(fp, a, b);
            if r[0].abs() <= lim && r[1].abs() <= lim {
                found.push(classify_branch(tag_generic(fp, a, b)));
            }
        }
    }
    found.sort_by(|x, y| x.a.total_cmp(&y.a).then(x.b.total_cmp(&y.b)));
    dedup(found)
}

/// Generic solver for arbitrary (k, h₁, h₂): 50 multistart Newton runs.
pub fn solve_field_generic(fp: &FieldParams, seed: u64) -> Vec<FieldSolution> {
    solve_field_multistart(fp, 50, seed)
}

/// For k = 2, h₁ = h₂, decide which sum branch an unequal pair belongs to.
fn classify_branch(mut s: FieldSolution) -> FieldSolution {
    let fp = &s.params;
    if s.branch == Branch::Equal || fp.k() != 2 || fp.h1 != fp.h2 {
        return s;
    }
    let ht = fp.h1 * fp.tau();
    let sd = (ht * (ht - 4.0)).max(0.0).sqrt();
    let plus = (ht + sd) / (2.0 * fp.h1);
    let minus = (ht - sd) / (2.0 * fp.h1);
    let sum = s.a + s.b;
    s.branch = if (sum - plus).abs() <= (sum - minus).abs() {
        Branch::SumPlus
    } else {
        Branch::SumMinus
    };
    s
}

/// Sum a + b prescribed by a branch, for k = 2 with uniform field.
pub fn branch_sum(tau: f64, h: f64, branch: Branch) -> Option<f64> {
    let ht = h * tau;
    let sd = (ht * (ht - 4.0)).sqrt();
    match branch {
        Branch::Equal => None,
        Branch::SumPlus => Some((ht + sd) / (2.0 * h)),
        Branch::SumMinus => Some((ht - sd) / (2.0 * h)),
    }
}

/// The solution as an unordered pair (smaller coordinate first).
pub fn to_pair(s: &FieldSolution) -> (f64, f64) {
    if s.a <= s.b {
        (s.a, s.b)
    } else {
        (s.b, s.a)
    }
}

/// The discriminant of the a = b cubic at (τ, h).
pub fn equal_branch_discriminant(tau: f64, h: f64) -> Result<f64> {
    Ok(solve_cubic(2.0 * h, -h * tau, tau, -2.0)?.discriminant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_law::solve_generic;
    use crate::polyroots::DiscriminantCase;

    #[test]
    fn unit_field_reduces_to_zero_field() {
        let fp = FieldParams::new(2, 7.0, 1.0, 1.0).unwrap();
        for (a, b) in [(0.3, 2.0), (1.0, 1.0), (4.0, 0.5)] {
            assert_eq!(
                residuals_abd(&fp, a, b).unwrap(),
                crate::boundary_law::residuals(2, 7.0, a, b)
            );
        }
        for p in solve_generic(&fp.base, 1e-12).unwrap() {
            let r = residuals_abd(&fp, p.a, p.b).unwrap();
            assert!(r[0].abs() < 1e-10 && r[1].abs() < 1e-10);
        }
    }

    #[test]
    fn residual_at_two_over_tau_is_nonzero() {
        let fp = FieldParams::new(2, 5.0, 1.5, 1.5).unwrap();
        let a = 2.0 / 5.0;
        let r = residuals_abd(&fp, a, a).unwrap();
        assert!(r[0].abs() > 1e-3);
        assert!(residuals_abd(&fp, 0.0, 1.0).is_err());
    }

    #[test]
    fn regions() {
        let t = classify_region(4.0, 1.0).unwrap();
        assert!(t.in_a && t.in_b && t.boundary);
        let t = classify_region(5.0, 0.5).unwrap();
        assert!(!t.in_a && !t.in_b);
        let t = classify_region(3.0, 10.0).unwrap();
        assert!(t.in_a && !t.in_b);
        assert_eq!(t.label(), "A");
        let t = classify_region(3.0, 27.0 / 8.0).unwrap();
        assert!(t.in_a && t.boundary);
        let t = classify_region(2.5, 100.0).unwrap();
        assert_eq!(t.label(), "neither");
    }

    #[test]
    fn unit_field_tau3_has_one_solution() {
        let s = solve_k2_uniform(3.0, 1.0, 1e-12).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].branch, Branch::Equal);
        assert!((s[0].a - 1.0).abs() < 1e-12);
        assert!(equal_branch_discriminant(3.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn sum_plus_degenerates_at_ht_four() {
        let s = solve_k2_uniform(4.0, 1.0, 1e-12).unwrap();
        let plus: Vec<_> = s.iter().filter(|x| x.branch == Branch::SumPlus).collect();
        assert_eq!(plus.len(), 2);
        for p in plus {
            assert!((p.a - 1.0).abs() < 1e-12 && (p.b - 1.0).abs() < 1e-12);
        }
        assert_eq!(enumerate_measure_candidates(4.0, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn region_b_interior_swap_symmetry() {
        // τ = 8: 4/τ = 0.5, τ³/(8(τ²−8)) = 512/448 ≈ 1.14
        let s = solve_k2_uniform(8.0, 0.8, 1e-12).unwrap();
        let minus: Vec<_> = s.iter().filter(|x| x.branch == Branch::SumMinus).collect();
        assert_eq!(minus.len(), 2);
        assert_eq!(minus[0].b, minus[1].a);
        assert_eq!(minus[0].a, minus[1].b);
        assert!(minus[0].a != minus[0].b);
        let sum = branch_sum(8.0, 0.8, Branch::SumMinus).unwrap();
        assert!((minus[0].a + minus[0].b - sum).abs() < 1e-12);
    }

    #[test]
    fn seven_candidates_at_unit_field_tau8() {
        let c = enumerate_measure_candidates(8.0, 1.0).unwrap();
        assert_eq!(c.len(), 7);
        assert!(c.iter().all(|s| s.max_residual() < 1e-10));
    }

    #[test]
    fn discriminant_zero_gives_two_equal_values() {
        // Bisect h on the discriminant sign at τ = 8.
        let tau = 8.0;
        let (mut lo, mut hi) = (0.3, 1.0);
        let d = |h: f64| equal_branch_discriminant(tau, h).unwrap();
        assert!(d(lo).signum() != d(hi).signum());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d(mid).signum() == d(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sol = solve_cubic(2.0 * lo, -lo * tau, tau, -2.0).unwrap();
        assert_eq!(sol.case, DiscriminantCase::Repeated);
        assert_eq!(sol.roots.len(), 2);
        assert!(sol.roots.iter().all(|r| r.value > 0.0));
    }

    #[test]
    fn generic_solvers_agree_with_closed_form() {
        for (tau, h) in [(8.0, 1.0), (5.0, 0.9), (3.5, 6.0), (6.0, 0.3)] {
            let fp = FieldParams::new(2, tau, h, h).unwrap();
            let mut closed: Vec<_> = enumerate_measure_candidates(tau, h)
                .unwrap()
                .iter()
                .map(|s| (s.a, s.b))
                .collect();
            let mut elim: Vec<_> = solve_field_elimination(&fp, 1e-12)
                .unwrap()
                .iter()
                .map(|s| (s.a, s.b))
                .collect();
            closed.sort_by(|x, y| x.0.total_cmp(&y.0));
            elim.sort_by(|x, y| x.0.total_cmp(&y.0));
            assert_eq!(closed.len(), elim.len(), "tau={tau} h={h}");
            for (c, e) in closed.iter().zip(&elim) {
                assert!((c.0 - e.0).abs() < 1e-9 && (c.1 - e.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn multistart_is_deterministic_and_consistent() {
        let fp = FieldParams::new(3, 5.0, 1.3, 0.7).unwrap();
        let a = solve_field_generic(&fp, 7);
        let b = solve_field_generic(&fp, 7);
        assert_eq!(a, b);
        let elim = solve_field_elimination(&fp, 1e-12).unwrap();
        for s in &a {
            assert!(elim
                .iter()
                .any(|e| (e.a - s.a).abs() < 1e-8 && (e.b - s.b).abs() < 1e-8));
        }
    }
}
