//! Univariate polynomials with either exact rational or `f64` coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient storage, ascending degree. Trailing zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealPolynomial {
    coeffs: Coefficients,
}

fn trim<T: Zero>(mut v: Vec<T>) -> Vec<T> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn add_vec<T: Num + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x.clone() + y.clone(),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => T::zero(),
        })
        .collect()
}

fn neg_vec<T: Num + Clone + Neg<Output = T>>(a: &[T]) -> Vec<T> {
    a.iter().map(|c| -c.clone()).collect()
}

fn mul_vec<T: Num + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Long division; `den` must be trimmed and nonempty.
fn div_rem_vec<T: Num + Clone>(num: &[T], den: &[T]) -> (Vec<T>, Vec<T>) {
    let dn = den.len() - 1;
    let lead = den[dn].clone();
    let mut rem: Vec<T> = num.to_vec();
    if rem.len() <= dn {
        return (Vec::new(), trim(rem));
    }
    let mut quot = vec![T::zero(); rem.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn].clone() / lead.clone();
        if !c.is_zero() {
            for (j, d) in den.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - c.clone() * d.clone();
            }
        }
        rem[i + dn] = T::zero();
        quot[i] = c;
    }
    rem.truncate(dn);
    (trim(quot), trim(rem))
}

fn derivative_vec<T: Num + Clone + FromPrimitive>(a: &[T]) -> Vec<T> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.clone() * T::from_usize(i).unwrap())
        .collect()
}

pub(crate) fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

pub(crate) fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl RealPolynomial {
    pub fn exact(coeffs: Vec<BigRational>) -> Self {
        Self {
            coeffs: Coefficients::Exact(trim(coeffs)),
        }
    }

    pub fn float(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs: Coefficients::Float(trim(coeffs)),
        }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::exact(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self::exact(Vec::new())
    }

    /// `c · x^n` in exact mode.
    pub fn monomial(c: BigRational, n: usize) -> Self {
        let mut v = vec![BigRational::zero(); n];
        v.push(c);
        Self::exact(v)
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.coeffs, Coefficients::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        self.len() == 0
    }

    fn len(&self) -> usize {
        match &self.coeffs {
            Coefficients::Exact(v) => v.len(),
            Coefficients::Float(v) => v.len(),
        }
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        match &self.coeffs {
            Coefficients::Exact(v) => v.iter().map(rat_to_f64).collect(),
            Coefficients::Float(v) => v.clone(),
        }
    }

    /// Exact coefficients. Float coefficients convert losslessly.
    pub fn coeffs_exact(&self) -> Vec<BigRational> {
        match &self.coeffs {
            Coefficients::Exact(v) => v.clone(),
            Coefficients::Float(v) => v.iter().map(|&c| rat(c)).collect(),
        }
    }

    pub fn to_float(&self) -> Self {
        Self::float(self.coeffs_f64())
    }

    pub fn to_exact(&self) -> Self {
        Self::exact(self.coeffs_exact())
    }

    /// Horner evaluation in double precision.
    pub fn evaluate(&self, x: f64) -> f64 {
        match &self.coeffs {
            Coefficients::Float(v) => v.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            Coefficients::Exact(v) => v.iter().rev().fold(0.0, |acc, c| acc * x + rat_to_f64(c)),
        }
    }

    /// Horner evaluation together with a running bound on the rounding error.
    pub fn evaluate_with_bound(&self, x: f64) -> (f64, f64) {
        let c = self.coeffs_f64();
        let value = c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
        let ax = x.abs();
        let magnitude = c.iter().rev().fold(0.0, |acc, &ci| acc * ax + ci.abs());
        let n = c.len() as f64;
        (value, (2.0 * n + 2.0) * f64::EPSILON * magnitude)
    }

    pub fn evaluate_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs_exact()
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn abs_coeff_sum(&self) -> f64 {
        self.coeffs_f64().iter().map(|c| c.abs()).sum()
    }

    pub fn derivative(&self) -> Self {
        match &self.coeffs {
            Coefficients::Exact(v) => Self::exact(derivative_vec(v)),
            Coefficients::Float(v) => Self::float(derivative_vec(v)),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        match &self.coeffs {
            Coefficients::Exact(v) => Self::exact(v.iter().map(|x| x * c).collect()),
            Coefficients::Float(v) => {
                let cf = rat_to_f64(c);
                Self::float(v.iter().map(|x| x * cf).collect())
            }
        }
    }

    /// Multiply by `x^n`.
    pub fn shift(&self, n: usize) -> Self {
        match &self.coeffs {
            Coefficients::Exact(v) if !v.is_empty() => {
                let mut out = vec![BigRational::zero(); n];
                out.extend(v.iter().cloned());
                Self::exact(out)
            }
            Coefficients::Float(v) if !v.is_empty() => {
                let mut out = vec![0.0; n];
                out.extend(v.iter().copied());
                Self::float(out)
            }
            _ => self.clone(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let one = if self.is_exact() {
            Self::from_i64s(&[1])
        } else {
            Self::float(vec![1.0])
        };
        (0..n).fold(one, |acc, _| &acc * self)
    }

    /// Quotient and remainder with `num = den·q + r`, `deg r < deg den`.
    pub fn div_rem(&self, den: &Self) -> Result<(Self, Self)> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match (&self.coeffs, &den.coeffs) {
            (Coefficients::Exact(a), Coefficients::Exact(b)) => {
                let (q, r) = div_rem_vec(a, b);
                (Self::exact(q), Self::exact(r))
            }
            _ => {
                let (q, r) = div_rem_vec(&self.coeffs_f64(), &den.coeffs_f64());
                (Self::float(q), Self::float(r))
            }
        })
    }

    /// Division that refuses to round: both operands must be exact.
    pub fn divide_exact(&self, den: &Self) -> Result<(Self, Self)> {
        if !self.is_exact() || !den.is_exact() {
            return Err(Error::NotExact);
        }
        self.div_rem(den)
    }

    /// Monic greatest common divisor (exact mode).
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        if !self.is_exact() || !other.is_exact() {
            return Err(Error::NotExact);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    pub fn monic(&self) -> Self {
        match &self.coeffs {
            Coefficients::Exact(v) if !v.is_empty() => {
                let lead = v.last().unwrap().clone();
                Self::exact(v.iter().map(|c| c / &lead).collect())
            }
            Coefficients::Float(v) if !v.is_empty() => {
                let lead = *v.last().unwrap();
                Self::float(v.iter().map(|c| c / lead).collect())
            }
            _ => self.clone(),
        }
    }

    /// Yun's square-free factorisation: `p = c · Π f_i^i`, returned as `(f_i, i)` with
    /// non-constant, pairwise coprime, square-free `f_i`.
    pub fn square_free_decomposition(&self) -> Result<Vec<(Self, u32)>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let p = self.to_exact();
        let dp = p.derivative();
        let mut out = Vec::new();
        if dp.is_zero() {
            return Ok(out);
        }
        let g = p.gcd(&dp)?;
        let mut b = p.div_rem(&g)?.0;
        let mut c = dp.div_rem(&g)?.0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let a = b.gcd(&d)?;
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a)?.0;
            if b.degree() == 0 {
                break;
            }
            c = d.div_rem(&a)?.0;
            d = &c - &b.derivative();
            i += 1;
        }
        Ok(out)
    }

    /// Number of sign changes in the nonzero coefficients.
    pub fn descartes_bound(&self) -> usize {
        let signs: Vec<i8> = match &self.coeffs {
            Coefficients::Exact(v) => v
                .iter()
                .filter(|c| !c.is_zero())
                .map(|c| if c.is_positive() { 1 } else { -1 })
                .collect(),
            Coefficients::Float(v) => v
                .iter()
                .filter(|c| **c != 0.0)
                .map(|c| if *c > 0.0 { 1 } else { -1 })
                .collect(),
        };
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Coefficients scaled by a positive rational so that they are coprime integers.
pub(crate) fn primitive_integer(coeffs: &[BigRational]) -> Vec<BigInt> {
    let lcm = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|c| c / &g).collect()
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&RealPolynomial> for &RealPolynomial {
            type Output = RealPolynomial;
            fn $method(self, rhs: &RealPolynomial) -> RealPolynomial {
                match (&self.coeffs, &rhs.coeffs) {
                    (Coefficients::Exact(a), Coefficients::Exact(b)) => {
                        RealPolynomial::exact($body(a, b))
                    }
                    _ => RealPolynomial::float($body(&self.coeffs_f64(), &rhs.coeffs_f64())),
                }
            }
        }
        impl $tr<RealPolynomial> for RealPolynomial {
            type Output = RealPolynomial;
            fn $method(self, rhs: RealPolynomial) -> RealPolynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

fn sub_vec<T: Num + Clone + Neg<Output = T>>(a: &[T], b: &[T]) -> Vec<T> {
    add_vec(a, &neg_vec(b))
}

binop!(Add, add, add_vec);
binop!(Sub, sub, sub_vec);
binop!(Mul, mul, mul_vec);

impl Neg for &RealPolynomial {
    type Output = RealPolynomial;
    fn neg(self) -> RealPolynomial {
        match &self.coeffs {
            Coefficients::Exact(v) => RealPolynomial::exact(neg_vec(v)),
            Coefficients::Float(v) => RealPolynomial::float(neg_vec(v)),
        }
    }
}

impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = match &self.coeffs {
            Coefficients::Exact(v) => v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| format!("({c})x^{i}"))
                .collect(),
            Coefficients::Float(v) => v
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| format!("({c})x^{i}"))
                .collect(),
        };
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        assert_eq!(RealPolynomial::zero().evaluate(5.0), 0.0);
        assert!(RealPolynomial::float(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn x_squared_over_x() {
        let x2 = RealPolynomial::from_i64s(&[0, 0, 1]);
        let x = RealPolynomial::from_i64s(&[0, 1]);
        let (q, rem) = x2.divide_exact(&x).unwrap();
        assert_eq!(q, x);
        assert!(rem.is_zero());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let p = RealPolynomial::from_i64s(&[1, 2]);
        assert_eq!(
            p.div_rem(&RealPolynomial::zero()),
            Err(Error::DivisionByZero)
        );
        assert_eq!(
            p.divide_exact(&RealPolynomial::float(vec![1.0])),
            Err(Error::NotExact)
        );
    }

    #[test]
    fn exact_evaluation_is_exact() {
        // 3x^2 - x/2 + 1/3 at x = 2/7
        let p = RealPolynomial::exact(vec![r(1, 3), r(-1, 2), r(3, 1)]);
        let v = p.evaluate_exact(&r(2, 7));
        assert_eq!(v, r(1, 3) - r(1, 7) + r(12, 49));
    }

    #[test]
    fn square_free_parts() {
        // (x-1)^2 (x-2)
        let p = RealPolynomial::from_i64s(&[-2, 5, -4, 1]);
        let sf = p.square_free_decomposition().unwrap();
        assert_eq!(sf.len(), 2);
        assert_eq!(sf[0], (RealPolynomial::from_i64s(&[-2, 1]), 1));
        assert_eq!(sf[1], (RealPolynomial::from_i64s(&[-1, 1]), 2));
    }

    #[test]
    fn descartes_counts_sign_changes() {
        assert_eq!(
            RealPolynomial::from_i64s(&[-2, 6, -6, 2]).descartes_bound(),
            3
        );
        assert_eq!(RealPolynomial::from_i64s(&[7]).descartes_bound(), 0);
        assert_eq!(
            RealPolynomial::float(vec![1.0, 0.0, -1.0]).descartes_bound(),
            1
        );
    }

    #[test]
    fn primitive_integer_keeps_signs() {
        let v = primitive_integer(&[r(-1, 2), r(3, 4), r(1, 1)]);
        assert_eq!(v, vec![BigInt::from(-2), BigInt::from(3), BigInt::from(4)]);
    }
}
