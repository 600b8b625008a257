//! Exact scalars: rationals extended by square roots of rationals and by
//! half-integer powers of π.
//!
//! A [`RadScalar`] is a finite sum `Σ c · √r · π^(k/2)` where `c` is rational,
//! `r` is a squarefree positive integer and `k` an integer. The square roots of
//! distinct squarefree integers are linearly independent over ℚ and π is
//! treated as transcendental, so two scalars are equal exactly when their
//! canonical term lists agree.
//!
//! Square roots of arbitrary rationals (`√ω`, `√(2ω)`, `√(n!)`) are reduced to
//! this form on construction. A perfect square such as `ω = 9` therefore
//! collapses to a plain rational immediately.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("inverse of a multi-term radical sum is not supported: {0}")]
    InverseOfSum(String),
    #[error("square root of negative rational {0}")]
    NegativeRadicand(String),
    #[error("radicand {0} is too large to factor")]
    RadicandTooLarge(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Shorthand for a small rational literal.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"p/q"` or `"-p/q"`, tolerating surrounding whitespace.
pub fn parse_rational(text: &str) -> Result<Rational, ScalarError> {
    let t = text.trim();
    let err = || ScalarError::Parse(text.to_string());
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            Ok(Rational::new(p, q))
        }
        None => t.parse::<BigInt>().map(Rational::from_integer).map_err(|_| err()),
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn to_i64(q: &Rational) -> Option<i64> {
    if is_integer(q) {
        q.numer().to_i64()
    } else {
        None
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(2m-1)!!`, with `(-1)!! = 1`.
pub fn double_factorial_odd(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

/// Splits `n` into `(s, r)` with `n = s² · r` and `r` squarefree.
fn square_split(mut n: u64) -> (u64, u64) {
    let mut square = 1u64;
    let mut free = 1u64;
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        let mut count = 0;
        while n.is_multiple_of(d) {
            n /= d;
            count += 1;
        }
        for _ in 0..count / 2 {
            square *= d;
        }
        if count % 2 == 1 {
            free *= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    (square, free * n)
}

/// Basis element `√radicand · π^(pi_half/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RadKey {
    pub radicand: u64,
    pub pi_half: i32,
}

impl RadKey {
    pub const ONE: RadKey = RadKey {
        radicand: 1,
        pi_half: 0,
    };

    /// Product of two basis elements as `(factor, key)`.
    fn mul(self, other: RadKey) -> (u64, RadKey) {
        let g = self.radicand.gcd(&other.radicand);
        let radicand = (self.radicand / g)
            .checked_mul(other.radicand / g)
            .expect("radicand overflow");
        (
            g,
            RadKey {
                radicand,
                pi_half: self.pi_half + other.pi_half,
            },
        )
    }

    fn to_f64(self) -> f64 {
        (self.radicand as f64).sqrt() * std::f64::consts::PI.powf(self.pi_half as f64 / 2.0)
    }
}

/// Exact scalar in canonical form. See the module docs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RadScalar {
    // sorted by key, no zero coefficients
    terms: Vec<(RadKey, Rational)>,
}

impl RadScalar {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::term(q, RadKey::ONE)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat_int(n))
    }

    pub fn term(coeff: Rational, key: RadKey) -> Self {
        if coeff.is_zero() {
            Self::zero()
        } else {
            Self {
                terms: vec![(key, coeff)],
            }
        }
    }

    /// `π^(k/2)`.
    pub fn pi_half_power(k: i32) -> Self {
        Self::term(
            Rational::one(),
            RadKey {
                radicand: 1,
                pi_half: k,
            },
        )
    }

    /// Exact `√q` for a non-negative rational `q`.
    pub fn sqrt_rational(q: &Rational) -> Result<Self, ScalarError> {
        if q.is_negative() {
            return Err(ScalarError::NegativeRadicand(q.to_string()));
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        // √(p/d) = √(p·d) / d
        let pd = q.numer() * q.denom();
        let pd = pd
            .to_u64()
            .ok_or_else(|| ScalarError::RadicandTooLarge(q.to_string()))?;
        let (square, free) = square_split(pd);
        let coeff = Rational::new(BigInt::from(square), q.denom().clone());
        Ok(Self::term(
            coeff,
            RadKey {
                radicand: free,
                pi_half: 0,
            },
        ))
    }

    fn from_map(map: BTreeMap<RadKey, Rational>) -> Self {
        Self {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == RadKey::ONE && self.terms[0].1.is_one()
    }

    pub fn terms(&self) -> &[(RadKey, Rational)] {
        &self.terms
    }

    pub fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }

    /// The value as a plain rational, when it has no radical or π part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(k, c)] if *k == RadKey::ONE => Some(c.clone()),
            _ => None,
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c * q)).collect(),
        }
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        match self.terms.as_slice() {
            [] => Err(ScalarError::DivisionByZero),
            [(k, c)] => {
                // 1/(c √r π^(k/2)) = √r / (c r) · π^(-k/2)
                let coeff = Rational::one() / (c * Rational::from_integer(BigInt::from(k.radicand)));
                Ok(Self::term(
                    coeff,
                    RadKey {
                        radicand: k.radicand,
                        pi_half: -k.pi_half,
                    },
                ))
            }
            _ => Err(ScalarError::InverseOfSum(self.to_string())),
        }
    }

    pub fn div(&self, other: &RadScalar) -> Result<Self, ScalarError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| rational_to_f64(c) * k.to_f64())
            .sum()
    }

    /// Sign of a single-term scalar (π and radicals are positive).
    pub fn single_term_sign(&self) -> Option<Ordering> {
        match self.terms.as_slice() {
            [] => Some(Ordering::Equal),
            [(_, c)] => Some(if c.is_positive() {
                Ordering::Greater
            } else {
                Ordering::Less
            }),
            _ => None,
        }
    }
}

/// Equality of canonical forms.
pub fn canonical_eq(a: &RadScalar, b: &RadScalar) -> bool {
    (a - b).is_zero()
}

impl From<Rational> for RadScalar {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl<'a> Add<&'a RadScalar> for &'a RadScalar {
    type Output = RadScalar;
    fn add(self, rhs: &'a RadScalar) -> RadScalar {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            let (ka, ca) = &self.terms[i];
            let (kb, cb) = &rhs.terms[j];
            match ka.cmp(kb) {
                Ordering::Less => {
                    out.push((*ka, ca.clone()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((*kb, cb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = ca + cb;
                    if !c.is_zero() {
                        out.push((*ka, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&rhs.terms[j..]);
        RadScalar { terms: out }
    }
}

impl<'a> Sub<&'a RadScalar> for &'a RadScalar {
    type Output = RadScalar;
    fn sub(self, rhs: &'a RadScalar) -> RadScalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RadScalar> for &'a RadScalar {
    type Output = RadScalar;
    fn mul(self, rhs: &'a RadScalar) -> RadScalar {
        if let ([(ka, ca)], [(kb, cb)]) = (self.terms.as_slice(), rhs.terms.as_slice()) {
            let (g, key) = ka.mul(*kb);
            let c = ca * cb * Rational::from_integer(BigInt::from(g));
            return RadScalar::term(c, key);
        }
        let mut map: BTreeMap<RadKey, Rational> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let (g, key) = ka.mul(*kb);
                let c = ca * cb * Rational::from_integer(BigInt::from(g));
                *map.entry(key).or_insert_with(Rational::zero) += c;
            }
        }
        RadScalar::from_map(map)
    }
}

impl Neg for &RadScalar {
    type Output = RadScalar;
    fn neg(self) -> RadScalar {
        RadScalar {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<RadScalar> for RadScalar {
            type Output = RadScalar;
            fn $m(self, rhs: RadScalar) -> RadScalar { (&self).$m(&rhs) }
        }
        impl $tr<&RadScalar> for RadScalar {
            type Output = RadScalar;
            fn $m(self, rhs: &RadScalar) -> RadScalar { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for RadScalar {
    type Output = RadScalar;
    fn neg(self) -> RadScalar {
        -&self
    }
}

fn fmt_key(f: &mut fmt::Formatter<'_>, key: &RadKey, mut first: bool) -> fmt::Result {
    if key.radicand != 1 {
        if !first {
            write!(f, "*")?;
        }
        write!(f, "sqrt({})", key.radicand)?;
        first = false;
    }
    if key.pi_half != 0 {
        if !first {
            write!(f, "*")?;
        }
        if key.pi_half % 2 == 0 {
            write!(f, "pi^{}", key.pi_half / 2)?;
        } else {
            write!(f, "pi^({}/2)", key.pi_half)?;
        }
    }
    Ok(())
}

fn fmt_term(f: &mut fmt::Formatter<'_>, key: &RadKey, c: &Rational) -> fmt::Result {
    if *key == RadKey::ONE {
        return write!(f, "{c}");
    }
    if c.is_one() {
        fmt_key(f, key, true)
    } else if (-c).is_one() {
        write!(f, "-")?;
        fmt_key(f, key, true)
    } else {
        write!(f, "{c}")?;
        fmt_key(f, key, false)
    }
}

impl fmt::Display for RadScalar {
    /// `a/b`, `a/b*sqrt(r)`, `a/b*pi^(k/2)`; sums are parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.terms.as_slice() {
            [] => write!(f, "0"),
            [(k, c)] => fmt_term(f, k, c),
            terms => {
                write!(f, "(")?;
                for (i, (k, c)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    fmt_term(f, k, c)?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt(q: Rational) -> RadScalar {
        RadScalar::sqrt_rational(&q).unwrap()
    }

    #[test]
    fn square_of_sqrt_reduces() {
        let w = sqrt(rat_int(4));
        assert_eq!(&w * &w, RadScalar::from_int(4));
        let w = sqrt(rat_int(3));
        assert!(!w.as_rational().is_some());
        assert_eq!(&w * &w, RadScalar::from_int(3));
    }

    #[test]
    fn normalization_constant_squared() {
        // (√(ω/π))² = ω · π^(-1)
        for omega in [rat_int(1), rat_int(2), rat(3, 5)] {
            let n = sqrt(omega.clone()) * RadScalar::pi_half_power(-1);
            let sq = &n * &n;
            let expected = RadScalar::term(
                omega,
                RadKey {
                    radicand: 1,
                    pi_half: -2,
                },
            );
            assert_eq!(sq, expected);
        }
    }

    #[test]
    fn perfect_square_collapses() {
        assert_eq!(sqrt(rat_int(9)), RadScalar::from_int(3));
        assert_eq!(sqrt(rat(9, 4)), RadScalar::from_rational(rat(3, 2)));
        assert!(canonical_eq(&sqrt(rat_int(9)), &RadScalar::from_int(3)));
    }

    #[test]
    fn sqrt_of_fraction_is_rationalized() {
        // √(1/2) = √2/2
        let s = sqrt(rat(1, 2));
        assert_eq!(
            s,
            RadScalar::term(
                rat(1, 2),
                RadKey {
                    radicand: 2,
                    pi_half: 0
                }
            )
        );
        assert_eq!(sqrt(rat_int(12)), sqrt(rat_int(3)).scale(&rat_int(2)));
    }

    #[test]
    fn two_w_equals_w_plus_w() {
        let w = sqrt(rat_int(5));
        assert!(canonical_eq(&w.scale(&rat_int(2)), &(&w + &w)));
    }

    #[test]
    fn pi_exponents_cancel() {
        let p = RadScalar::pi_half_power(1) * RadScalar::pi_half_power(-1);
        assert!(p.is_one());
    }

    #[test]
    fn distinct_pi_powers_never_merge() {
        let s = RadScalar::one() + RadScalar::pi_half_power(2);
        assert_eq!(s.terms().len(), 2);
    }

    #[test]
    fn inverse_single_term() {
        let a = sqrt(rat_int(6)).scale(&rat(3, 7)) * RadScalar::pi_half_power(3);
        let inv = a.inv().unwrap();
        assert!((&a * &inv).is_one());
    }

    #[test]
    fn inverse_errors() {
        assert_eq!(RadScalar::zero().inv(), Err(ScalarError::DivisionByZero));
        let sum = RadScalar::one() + sqrt(rat_int(2));
        assert!(matches!(sum.inv(), Err(ScalarError::InverseOfSum(_))));
    }

    #[test]
    fn negative_radicand_rejected() {
        assert!(RadScalar::sqrt_rational(&rat(-1, 2)).is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(RadScalar::from_rational(rat(3, 2)).to_string(), "3/2");
        assert_eq!(sqrt(rat_int(2)).to_string(), "sqrt(2)");
        assert_eq!(sqrt(rat_int(2)).scale(&rat(-1, 3)).to_string(), "-1/3*sqrt(2)");
        assert_eq!(RadScalar::pi_half_power(-1).to_string(), "pi^(-1/2)");
        assert_eq!(
            RadScalar::pi_half_power(2).scale(&rat(1, 2)).to_string(),
            "1/2*pi^1"
        );
        assert_eq!(RadScalar::zero().to_string(), "0");
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational(" -4 ").unwrap(), rat_int(-4));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn float_value() {
        let v = sqrt(rat_int(2)) * RadScalar::pi_half_power(1);
        assert!((v.to_f64() - (2f64.sqrt() * std::f64::consts::PI.sqrt())).abs() < 1e-14);
    }
}
