//! Real root isolation with exact Sturm sequences.
//!
//! Coefficients are converted to rationals (losslessly for `f64` input), the
//! polynomial is split into square-free parts, and every sign query at a dyadic
//! point is answered exactly in integer arithmetic whenever the floating-point
//! filter cannot decide it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::poly::{primitive_integer, RealPolynomial};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Integer polynomial, ascending degree, with a float shadow for cheap sign filtering.
#[derive(Clone, Debug)]
pub(crate) struct IntPoly {
    c: Vec<BigInt>,
    shadow: Vec<f64>,
}

impl IntPoly {
    pub(crate) fn from_rational(coeffs: &[BigRational]) -> Self {
        let c = primitive_integer(coeffs);
        let shadow = c
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::INFINITY))
            .collect();
        Self { c, shadow }
    }

    fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn as_rational(&self) -> Vec<BigRational> {
        self.c
            .iter()
            .cloned()
            .map(BigRational::from_integer)
            .collect()
    }

    /// Exact sign of the polynomial at a finite double.
    pub(crate) fn sign_at(&self, x: f64) -> i8 {
        if self.c.is_empty() {
            return 0;
        }
        if self.shadow.iter().all(|v| v.is_finite()) {
            let ax = x.abs();
            let mut val = 0.0f64;
            let mut mag = 0.0f64;
            for &ci in self.shadow.iter().rev() {
                val = val * x + ci;
                mag = mag * ax + ci.abs();
            }
            // Horner error bound, doubled for the rounding of the shadow itself.
            let bound = 4.0 * (self.c.len() as f64 + 1.0) * f64::EPSILON * mag;
            if val.is_finite() && mag.is_finite() && val.abs() > bound {
                return if val > 0.0 { 1 } else { -1 };
            }
        }
        self.sign_at_exact(x)
    }

    /// x = m·2^e; evaluate Σ c_i m^i 2^{e·i}, scaled by 2^{-e·n} when e < 0.
    fn sign_at_exact(&self, x: f64) -> i8 {
        let (m, e) = decompose(x);
        let n = self.degree();
        let mut acc = self.c[n].clone();
        if e >= 0 {
            let xv = m << (e as usize);
            for ci in self.c[..n].iter().rev() {
                acc = acc * &xv + ci;
            }
        } else {
            let s = (-e) as usize;
            for (i, ci) in self.c[..n].iter().enumerate().rev() {
                acc = acc * &m + (ci << (s * (n - i)));
            }
        }
        if acc.is_zero() {
            0
        } else if acc.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Split a finite double into an integer mantissa and a binary exponent.
fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | 0x0010_0000_0000_0000, exp - 1075)
    };
    (BigInt::from(sign * mant), e)
}

#[derive(Clone, Debug)]
pub(crate) struct SturmChain {
    chain: Vec<IntPoly>,
}

impl SturmChain {
    /// Chain of a square-free polynomial given by exact coefficients.
    pub(crate) fn new(p: &RealPolynomial) -> Result<Self> {
        let p = p.to_exact();
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let norm = |q: &RealPolynomial| IntPoly::from_rational(&q.coeffs_exact());
        let mut chain = vec![norm(&p)];
        let mut prev = RealPolynomial::exact(chain[0].as_rational());
        let mut cur = prev.derivative();
        while !cur.is_zero() {
            let ip = norm(&cur);
            cur = RealPolynomial::exact(ip.as_rational());
            chain.push(ip);
            let (_, r) = prev.div_rem(&cur)?;
            prev = cur;
            cur = -&r;
        }
        Ok(Self { chain })
    }

    pub(crate) fn last_is_constant(&self) -> bool {
        self.chain.last().is_some_and(|p| p.degree() == 0)
    }

    fn variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = p.sign_at(x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct roots in the half-open interval (lo, hi].
    pub(crate) fn count(&self, lo: f64, hi: f64) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }

    fn base(&self) -> &IntPoly {
        &self.chain[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Certificate {
    /// The square-free part changes sign between the interval ends.
    SignChange { lo: i8, hi: i8 },
    /// The refined value is a dyadic rational at which the polynomial vanishes exactly.
    ExactZero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsolatedRoot {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub multiplicity: u32,
    pub certificate: Certificate,
    /// Set when float-mode roots closer than 100·tol were merged into this one.
    pub clustered: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<IsolatedRoot>,
    pub count: usize,
}

impl RootSet {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

/// Bound on the modulus of all roots, rounded up to a power of two.
fn cauchy_bound(p: &IntPoly) -> f64 {
    let n = p.degree();
    let lead = BigRational::from_integer(p.c[n].abs());
    let max = p.c[..n]
        .iter()
        .map(|c| BigRational::from_integer(c.abs()) / &lead)
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let b = 1.0 + max.to_f64().unwrap_or(f64::MAX);
    2f64.powi(b.log2().ceil().max(0.0) as i32 + 1).min(f64::MAX)
}

fn isolate_square_free(
    chain: &SturmChain,
    lo: f64,
    hi: f64,
    tol: f64,
    multiplicity: u32,
    out: &mut Vec<IsolatedRoot>,
) {
    let mut stack = vec![(lo, hi, chain.count(lo, hi))];
    while let Some((a, b, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        if n == 1 || mid <= a || mid >= b {
            out.push(refine(chain.base(), a, b, tol, multiplicity));
            continue;
        }
        let left = chain.count(a, mid);
        stack.push((mid, b, n - left));
        stack.push((a, mid, left));
    }
}

/// Bisect a single root in (lo, hi] down to width tol/10, then take one guarded Newton step.
fn refine(p: &IntPoly, mut lo: f64, mut hi: f64, tol: f64, multiplicity: u32) -> IsolatedRoot {
    let s_hi = p.sign_at(hi);
    let s_lo = p.sign_at(lo);
    if s_hi == 0 {
        return IsolatedRoot {
            lo,
            hi,
            value: hi,
            multiplicity,
            certificate: Certificate::ExactZero,
            clustered: false,
        };
    }
    let target = tol / 10.0;
    while hi - lo > target {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = p.sign_at(mid);
        if s == 0 {
            return IsolatedRoot {
                lo,
                hi,
                value: mid,
                multiplicity,
                certificate: Certificate::ExactZero,
                clustered: false,
            };
        }
        if s == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut value = 0.5 * (lo + hi);
    let (f, df) = horner_with_derivative(&p.shadow, value);
    if df != 0.0 && f.is_finite() && df.is_finite() {
        let step = value - f / df;
        if step > lo && step <= hi {
            value = step;
        }
    }
    IsolatedRoot {
        lo,
        hi,
        value,
        multiplicity,
        certificate: Certificate::SignChange { lo: s_lo, hi: s_hi },
        clustered: false,
    }
}

fn horner_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut df = 0.0;
    for &ci in c.iter().rev() {
        df = df * x + f;
        f = f * x + ci;
    }
    (f, df)
}

/// Square-free parts with multiplicities. The common case (already square-free)
/// skips the decomposition.
fn square_free_parts(p: &RealPolynomial) -> Result<Vec<(SturmChain, u32)>> {
    let chain = SturmChain::new(p)?;
    if chain.last_is_constant() {
        return Ok(vec![(chain, 1)]);
    }
    p.square_free_decomposition()?
        .into_iter()
        .map(|(f, m)| Ok((SturmChain::new(&f)?, m)))
        .collect()
}

/// Isolate every real root of `p` in the half-open interval (lo, hi].
pub fn isolate_roots_in(p: &RealPolynomial, lo: f64, hi: f64, tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !(tol > 0.0) || !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "need tol > 0 and lo < hi (tol={tol}, lo={lo}, hi={hi})"
        )));
    }
    let mut roots = Vec::new();
    if p.degree() > 0 {
        for (chain, m) in square_free_parts(p)? {
            isolate_square_free(&chain, lo, hi, tol, m, &mut roots);
        }
    }
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    if !p.is_exact() {
        roots = merge_clusters(roots, 100.0 * tol);
    }
    let count = roots.len();
    Ok(RootSet { roots, count })
}

/// Isolate every positive real root of `p`.
pub fn isolate_positive_roots(p: &RealPolynomial, tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let exact = p.coeffs_exact();
    let skip = exact.iter().take_while(|c| c.is_zero()).count();
    let stripped = RealPolynomial::exact(exact[skip..].to_vec());
    if stripped.degree() == 0 {
        return Ok(RootSet::default());
    }
    let bound = cauchy_bound(&IntPoly::from_rational(&stripped.coeffs_exact()));
    let mut set = isolate_roots_in(&stripped, 0.0, bound, tol)?;
    if !p.is_exact() {
        set.roots = merge_clusters(set.roots, 100.0 * tol);
        set.count = set.roots.len();
    }
    Ok(set)
}

fn merge_clusters(roots: Vec<IsolatedRoot>, gap: f64) -> Vec<IsolatedRoot> {
    let mut out: Vec<IsolatedRoot> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last_mut() {
            Some(prev) if r.value - prev.value < gap => {
                let total = prev.multiplicity + r.multiplicity;
                prev.value = (prev.value * prev.multiplicity as f64
                    + r.value * r.multiplicity as f64)
                    / total as f64;
                prev.hi = r.hi;
                prev.multiplicity = total;
                prev.clustered = true;
            }
            _ => out.push(r),
        }
    }
    out
}

/// Number of distinct real roots in (lo, hi], exactly.
pub fn count_roots_in(p: &RealPolynomial, lo: f64, hi: f64) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Ok(0);
    }
    Ok(square_free_parts(p)?
        .iter()
        .map(|(c, _)| c.count(lo, hi))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_round_trips() {
        for x in [1.0, -0.75, 3.5e-300, 1e300, 5e-324, 0.1] {
            let (m, e) = decompose(x);
            let back =
                m.to_f64().unwrap() * 2f64.powi(e as i32 / 2) * 2f64.powi(e as i32 - e as i32 / 2);
            assert_eq!(back, x);
        }
    }

    #[test]
    fn exact_sign_at_root() {
        // (2x - 1)(x - 3)
        let p = IntPoly::from_rational(&RealPolynomial::from_i64s(&[3, -7, 2]).coeffs_exact());
        assert_eq!(p.sign_at(0.5), 0);
        assert_eq!(p.sign_at(3.0), 0);
        assert_eq!(p.sign_at(1.0), -1);
        assert_eq!(p.sign_at(0.49999999999999994), 1);
    }

    #[test]
    fn double_root_is_reported_once() {
        // (x-1)^2 (x-2)
        let p = RealPolynomial::from_i64s(&[-2, 5, -4, 1]);
        let set = isolate_positive_roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(set.count, 2);
        assert_eq!(set.roots[0].multiplicity, 2);
        assert!((set.roots[0].value - 1.0).abs() < 1e-12);
        assert!((set.roots[1].value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_root_is_not_positive() {
        let p = RealPolynomial::from_i64s(&[0, 0, -1, 1]);
        let set = isolate_positive_roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(set.values(), vec![1.0]);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(
            isolate_positive_roots(&RealPolynomial::zero(), 1e-12),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn close_roots_are_separated_in_exact_mode() {
        // (x - 1)(x - 1 - 2^-40)
        let eps = BigRational::new(1.into(), BigInt::from(1u64 << 40));
        let one = BigRational::from_integer(1.into());
        let r2 = &one + &eps;
        let p = RealPolynomial::exact(vec![&one * &r2, -(&one + &r2), one.clone()]);
        let set = isolate_positive_roots(&p, 1e-14).unwrap();
        assert_eq!(set.count, 2);
    }

    #[test]
    fn interval_count_matches_isolation() {
        let p = RealPolynomial::from_i64s(&[6, -5, -2, 1]); // roots -2, 1, 3
        assert_eq!(count_roots_in(&p, -10.0, 10.0).unwrap(), 3);
        assert_eq!(count_roots_in(&p, 0.0, 10.0).unwrap(), 2);
        assert_eq!(count_roots_in(&p, 1.0, 3.0).unwrap(), 1);
        let set = isolate_roots_in(&p, -10.0, 0.0, 1e-12).unwrap();
        assert!((set.roots[0].value + 2.0).abs() < 1e-12);
    }
}
