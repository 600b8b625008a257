use std::fmt;

use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, Poly};
use super::FuncError;
use crate::scalar::{is_integer, rat, rat_int, rational_to_f64, to_i64, RadScalar, Rational};

/// `poly · ∏_{i<j}(x_i² − x_j²)^mu · exp(gamma · Σ x_i²)`.
///
/// The prefactor is taken on the chamber where every `x_i² − x_j²` (i < j) is
/// positive, so non-integer `mu` is smooth there.
///
/// Canonical form: for integer `mu`, either `mu = 0`, or `mu < 0` and the
/// prefactor does not divide `poly`. For non-integer `mu`, the prefactor never
/// divides `poly`. Zero is stored with `mu = gamma = 0`. Structural equality is
/// equality of functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    poly: Poly,
    mu: Rational,
    gamma: Rational,
}

impl Element {
    pub fn new(poly: Poly, mu: Rational, gamma: Rational) -> Self {
        let mut e = Element { poly, mu, gamma };
        e.canonicalize();
        e
    }

    pub fn from_poly(poly: Poly) -> Self {
        Self::new(poly, Rational::zero(), Rational::zero())
    }

    pub fn zero(nvars: usize) -> Self {
        Self::from_poly(Poly::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        Self::from_poly(Poly::one(nvars))
    }

    pub fn constant(nvars: usize, c: RadScalar) -> Self {
        Self::from_poly(Poly::constant(nvars, c))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_poly(Poly::var(nvars, i))
    }

    pub fn monomial(exps: &[u32]) -> Self {
        Self::from_poly(Poly::from_exponents(exps, RadScalar::one()))
    }

    /// `exp(gamma · Σ x_i²)`.
    pub fn gaussian(nvars: usize, gamma: Rational) -> Self {
        Self::new(Poly::one(nvars), Rational::zero(), gamma)
    }

    /// `∏_{i<j}(x_i² − x_j²)^mu`.
    pub fn prefactor_power(nvars: usize, mu: Rational) -> Self {
        Self::new(Poly::one(nvars), mu, Rational::zero())
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    fn npairs(&self) -> i64 {
        let n = self.nvars() as i64;
        n * (n - 1) / 2
    }

    fn canonicalize(&mut self) {
        let n = self.nvars();
        if self.poly.is_zero() {
            self.mu = Rational::zero();
            self.gamma = Rational::zero();
            return;
        }
        if n < 2 {
            self.mu = Rational::zero();
            return;
        }
        if is_integer(&self.mu) {
            if !self.mu.is_negative() {
                let k = to_i64(&self.mu).expect("prefactor power out of range") as u32;
                if k > 0 {
                    self.poly = &self.poly * &Poly::prefactor(n).pow(k);
                    self.mu = Rational::zero();
                }
                return;
            }
            while self.mu.is_negative() {
                match self.poly.div_prefactor() {
                    Some(q) => {
                        self.poly = q;
                        self.mu += Rational::one();
                    }
                    None => break,
                }
            }
        } else {
            while let Some(q) = self.poly.div_prefactor() {
                self.poly = q;
                self.mu += Rational::one();
            }
        }
    }

    /// Whether `self + other` is defined: equal Gaussian exponent and
    /// prefactor powers differing by an integer. Zero is addable to anything.
    pub fn addable(&self, other: &Element) -> bool {
        self.is_zero()
            || other.is_zero()
            || (self.gamma == other.gamma && is_integer(&(&self.mu - &other.mu)))
    }

    pub fn try_add(&self, other: &Element) -> Result<Element, FuncError> {
        assert_eq!(self.nvars(), other.nvars(), "variable count mismatch");
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.gamma != other.gamma {
            return Err(FuncError::IncompatibleGaussian {
                left: self.gamma.to_string(),
                right: other.gamma.to_string(),
            });
        }
        let diff = &self.mu - &other.mu;
        if !is_integer(&diff) {
            return Err(FuncError::NonAlignablePrefactor {
                left: self.mu.to_string(),
                right: other.mu.to_string(),
            });
        }
        let n = self.nvars();
        let d = to_i64(&diff).expect("prefactor power out of range");
        // align both on the smaller exponent
        let (poly, mu) = if d >= 0 {
            let lifted = &self.poly * &Poly::prefactor(n).pow(d as u32);
            (&lifted + &other.poly, other.mu.clone())
        } else {
            let lifted = &other.poly * &Poly::prefactor(n).pow((-d) as u32);
            (&self.poly + &lifted, self.mu.clone())
        };
        Ok(Element::new(poly, mu, self.gamma.clone()))
    }

    pub fn try_sub(&self, other: &Element) -> Result<Element, FuncError> {
        self.try_add(&other.neg())
    }

    pub fn mul(&self, other: &Element) -> Element {
        assert_eq!(self.nvars(), other.nvars(), "variable count mismatch");
        Element::new(
            &self.poly * &other.poly,
            &self.mu + &other.mu,
            &self.gamma + &other.gamma,
        )
    }

    pub fn mul_poly(&self, p: &Poly) -> Element {
        Element::new(&self.poly * p, self.mu.clone(), self.gamma.clone())
    }

    pub fn scale(&self, c: &RadScalar) -> Element {
        Element::new(self.poly.scale(c), self.mu.clone(), self.gamma.clone())
    }

    pub fn scale_rational(&self, q: &Rational) -> Element {
        self.scale(&RadScalar::from_rational(q.clone()))
    }

    pub fn neg(&self) -> Element {
        Element {
            poly: -&self.poly,
            mu: self.mu.clone(),
            gamma: self.gamma.clone(),
        }
    }

    /// Multiplies by `exp(delta · Σ x_i²)`.
    pub fn shift_gaussian(&self, delta: &Rational) -> Element {
        Element::new(self.poly.clone(), self.mu.clone(), &self.gamma + delta)
    }

    /// Inverse of `c · P^k · P^mu · exp(gamma X²)` for a nonzero constant `c`.
    pub fn try_inverse(&self) -> Result<Element, FuncError> {
        let mut poly = self.poly.clone();
        let mut k = 0i64;
        if self.nvars() >= 2 {
            while let Some(q) = poly.div_prefactor() {
                poly = q;
                k += 1;
            }
        }
        let c = poly
            .as_constant()
            .filter(|c| !c.is_zero())
            .ok_or_else(|| FuncError::NotInvertible(self.to_string()))?;
        let inv = c.inv().map_err(|_| FuncError::NotInvertible(self.to_string()))?;
        Ok(Element::new(
            Poly::constant(self.nvars(), inv),
            -&self.mu - rat_int(k),
            -&self.gamma,
        ))
    }

    /// Exact `∂_i` (zero-based index) by the product rule over the
    /// polynomial, prefactor and Gaussian parts.
    pub fn differentiate(&self, i: usize) -> Element {
        let n = self.nvars();
        assert!(i < n, "variable index {i} out of range for {n} variables");
        if self.is_zero() {
            return self.clone();
        }
        let gauss_part = if self.gamma.is_zero() {
            Poly::zero(n)
        } else {
            self.poly
                .shift(&Monomial::var(n, i))
                .scale_rational(&(&self.gamma * rat_int(2)))
        };
        let inner = &self.poly.partial(i) + &gauss_part;
        if self.mu.is_zero() || n < 2 {
            return Element::new(inner, self.mu.clone(), self.gamma.clone());
        }
        // ∂(p P^μ) = (∂p·P + μ p ∂P) P^(μ−1)
        let pre = Poly::prefactor(n);
        let poly = &(&inner * &pre) + &(&self.poly * &pre.partial(i)).scale_rational(&self.mu);
        Element::new(poly, &self.mu - Rational::one(), self.gamma.clone())
    }

    /// Scaling degree when homogeneous: polynomial degree plus the
    /// prefactor's contribution `2 · npairs · mu`.
    pub fn homogeneous_degree(&self) -> Option<Rational> {
        if !self.poly.is_homogeneous() {
            return None;
        }
        let d = self.poly.degree()?;
        Some(rat_int(d as i64) + &self.mu * rat_int(2 * self.npairs()))
    }

    /// Average over the order-4 group generated by `x1 ↔ x2` and
    /// `(x1, x2) → (−x1, −x2)`.
    pub fn symmetrize_d2(&self) -> Result<Element, FuncError> {
        if self.nvars() != 2 {
            return Err(FuncError::WrongArity {
                expected: 2,
                found: self.nvars(),
            });
        }
        if !is_integer(&self.mu) {
            return Err(FuncError::NonIntegerPrefactor(self.mu.to_string()));
        }
        // the swap sends the prefactor to its negative
        let swap_sign = if to_i64(&self.mu).unwrap_or(0) % 2 == 0 {
            RadScalar::one()
        } else {
            RadScalar::from_int(-1)
        };
        let p = &self.poly;
        let swapped = p.signed_permute(&[1, 0], &[1, 1]).scale(&swap_sign);
        let flipped = p.signed_permute(&[0, 1], &[-1, -1]);
        let both = p.signed_permute(&[1, 0], &[-1, -1]).scale(&swap_sign);
        let sum = &(&(p + &swapped) + &flipped) + &both;
        Ok(Element::new(
            sum.scale_rational(&rat(1, 4)),
            self.mu.clone(),
            self.gamma.clone(),
        ))
    }

    /// Evaluates at `x`. Non-integer prefactor powers use `|x_i² − x_j²|`.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.poly.eval_f64(x)
            * prefactor_pow_f64(x, &self.mu)
            * (rational_to_f64(&self.gamma) * r2).exp()
    }
}

/// `∏_{i<j}(x_i² − x_j²)^mu` in floating point; the absolute value is used
/// for non-integer powers.
pub fn prefactor_pow_f64(x: &[f64], mu: &Rational) -> f64 {
    if mu.is_zero() {
        return 1.0;
    }
    let mut p = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            p *= x[i] * x[i] - x[j] * x[j];
        }
    }
    match to_i64(mu) {
        Some(k) => p.powi(k as i32),
        None => p.abs().powf(rational_to_f64(mu)),
    }
}

impl fmt::Display for Element {
    /// `(poly)*(x1^2-x2^2)^mu*exp(gamma*X2)`, omitting trivial factors.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.poly)?;
        if !self.mu.is_zero() {
            match self.nvars() {
                2 => write!(f, "*(x1^2-x2^2)^{}", self.mu)?,
                _ => write!(f, "*prod(xi^2-xj^2)^{}", self.mu)?,
            }
        }
        if !self.gamma.is_zero() {
            write!(f, "*exp({}*X2)", self.gamma)?;
        }
        Ok(())
    }
}
