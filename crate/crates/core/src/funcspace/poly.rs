//! Sparse multivariate polynomials over [`RadScalar`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::scalar::{rat_int, RadScalar, Rational};

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then lexicographic with `x1` most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, RadScalar>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: RadScalar) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, RadScalar::one())
    }

    pub fn monomial(m: Monomial, c: RadScalar) -> Self {
        let mut p = Self::zero(m.nvars());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// `x_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::var(nvars, i), RadScalar::one())
    }

    pub fn from_exponents(exps: &[u32], c: RadScalar) -> Self {
        Self::monomial(Monomial(exps.to_vec()), c)
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, RadScalar)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    /// `Σ x_i²`.
    pub fn radius_squared(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        for i in 0..nvars {
            let mut e = vec![0; nvars];
            e[i] = 2;
            p.add_term(Monomial(e), &RadScalar::one());
        }
        p
    }

    /// `x_i² − x_j²`.
    pub fn pair_factor(nvars: usize, i: usize, j: usize) -> Self {
        let mut ei = vec![0; nvars];
        ei[i] = 2;
        let mut ej = vec![0; nvars];
        ej[j] = 2;
        Self::from_terms(
            nvars,
            [
                (Monomial(ei), RadScalar::one()),
                (Monomial(ej), RadScalar::from_int(-1)),
            ],
        )
    }

    /// `∏_{i<j} (x_i² − x_j²)`; the constant 1 for fewer than two variables.
    pub fn prefactor(nvars: usize) -> Self {
        let mut p = Self::one(nvars);
        for i in 0..nvars {
            for j in i + 1..nvars {
                p = &p * &Self::pair_factor(nvars, i, j);
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &RadScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> RadScalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// The constant value, if this polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<RadScalar> {
        match self.terms.len() {
            0 => Some(RadScalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.min_degree()
    }

    pub fn add_term(&mut self, m: Monomial, c: &RadScalar) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn scale(&self, c: &RadScalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn scale_rational(&self, q: &Rational) -> Poly {
        self.scale(&RadScalar::from_rational(q.clone()))
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::one(self.nvars), |acc, _| &acc * self)
    }

    /// `∂_i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[i] -= 1;
            out.add_term(Monomial(exps), &c.scale(&rat_int(e as i64)));
        }
        out
    }

    /// Multiplies by the monomial `m`.
    pub fn shift(&self, m: &Monomial) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    /// Splits into homogeneous parts keyed by total degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<u32, Poly> {
        let mut parts: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(m.degree())
                .or_insert_with(|| Poly::zero(self.nvars))
                .terms
                .insert(m.clone(), c.clone());
        }
        parts
    }

    /// Exact division by `x_i² − x_j²`, or `None` if it does not divide.
    pub fn div_pair_factor(&self, i: usize, j: usize) -> Option<Poly> {
        // Reduce x_i² → x_j² from the top x_i-degree down; the quotient
        // collects the reduced parts and the remainder must vanish.
        let mut rem: BTreeMap<Vec<u32>, RadScalar> =
            self.terms.iter().map(|(m, c)| (m.0.clone(), c.clone())).collect();
        let mut quotient = Poly::zero(self.nvars);
        loop {
            let top = rem
                .iter()
                .filter(|(e, _)| e[i] >= 2)
                .max_by_key(|(e, _)| e[i])
                .map(|(e, c)| (e.clone(), c.clone()));
            let Some((e, c)) = top else { break };
            rem.remove(&e);
            let mut q = e.clone();
            q[i] -= 2;
            quotient.add_term(Monomial(q.clone()), &c);
            let mut moved = q;
            moved[j] += 2;
            let entry = rem.entry(moved.clone()).or_default();
            let sum = &*entry + &c;
            if sum.is_zero() {
                rem.remove(&moved);
            } else {
                *entry = sum;
            }
        }
        rem.is_empty().then_some(quotient)
    }

    /// Exact division by the full prefactor `∏_{i<j}(x_i² − x_j²)`.
    pub fn div_prefactor(&self) -> Option<Poly> {
        let mut p = self.clone();
        for i in 0..self.nvars {
            for j in i + 1..self.nvars {
                p = p.div_pair_factor(i, j)?;
            }
        }
        Some(p)
    }

    /// Applies `x_k ↦ sign_k · x_{perm[k]}`.
    pub fn signed_permute(&self, perm: &[usize], signs: &[i32]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut exps = vec![0; self.nvars];
            let mut negative = false;
            for (k, &e) in m.0.iter().enumerate() {
                exps[perm[k]] += e;
                if signs[k] < 0 && e % 2 == 1 {
                    negative = !negative;
                }
            }
            let c = if negative { -c } else { c.clone() };
            out.add_term(Monomial(exps), &c);
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mono: f64 = m.0.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
                c.to_f64() * mono
            })
            .sum()
    }
}

impl<'a> std::ops::Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let (big, small) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl<'a> std::ops::Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }
}

pub(crate) fn fmt_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "x{}", i + 1)?;
        } else {
            write!(f, "x{}^{}", i + 1, e)?;
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    /// Terms in descending graded-lex order, e.g. `2*x1^2 - x2 + 1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let (negative, mag) = match c.as_rational() {
                Some(q) if q < Rational::zero() => (true, RadScalar::from_rational(-q)),
                _ => (false, c.clone()),
            };
            if idx > 0 {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            } else if negative {
                write!(f, "-")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                fmt_monomial(f, m)?;
            } else {
                write!(f, "{mag}*")?;
                fmt_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    #[test]
    fn grlex_order() {
        let a = Monomial(vec![2, 0]);
        let b = Monomial(vec![1, 1]);
        let c = Monomial(vec![0, 3]);
        assert!(a > b);
        assert!(c > a);
    }

    #[test]
    fn partial_of_square() {
        let p = &x(0) * &x(0);
        assert_eq!(p.partial(0), x(0).scale_rational(&rat_int(2)));
        assert!(p.partial(1).is_zero());
    }

    #[test]
    fn pair_factor_division() {
        let f = Poly::pair_factor(2, 0, 1);
        let g = &(&x(0) * &x(1)) + &Poly::one(2);
        let prod = &f * &g;
        assert_eq!(prod.div_pair_factor(0, 1), Some(g.clone()));
        assert_eq!(g.div_pair_factor(0, 1), None);
        assert_eq!(x(0).div_pair_factor(0, 1), None);
    }

    #[test]
    fn prefactor_division_three_vars() {
        let p = Poly::prefactor(3);
        assert_eq!(p.degree(), Some(6));
        let g = Poly::var(3, 2);
        assert_eq!((&p * &g).div_prefactor(), Some(g));
        assert_eq!(Poly::radius_squared(3).div_prefactor(), None);
    }

    #[test]
    fn swap_and_sign_flip() {
        let p = &(&x(0) * &x(0)) + &x(1).scale_rational(&rat(1, 2));
        let swapped = p.signed_permute(&[1, 0], &[1, 1]);
        assert_eq!(swapped, &(&x(1) * &x(1)) + &x(0).scale_rational(&rat(1, 2)));
        let flipped = p.signed_permute(&[0, 1], &[-1, -1]);
        assert_eq!(flipped, &(&x(0) * &x(0)) - &x(1).scale_rational(&rat(1, 2)));
    }

    #[test]
    fn rendering_is_grlex_descending() {
        let p = &(&(&x(0) * &x(0)) + &(&x(0) * &x(1))) + &Poly::one(2);
        assert_eq!(p.to_string(), "x1^2 + x1*x2 + 1");
        let q = &x(1).scale_rational(&rat_int(-2)) + &Poly::constant(2, RadScalar::from_rational(rat(-1, 2)));
        assert_eq!(q.to_string(), "-2*x2 - 1/2");
    }
}
