//! Exact Gaussian-weighted inner products on the function class, and an
//! independent Gauss–Hermite quadrature for cross-checking them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::funcspace::{Element, Poly};
use crate::scalar::{double_factorial_odd, is_integer, rat_int, rational_to_f64, RadScalar, Rational, ScalarError};

/// Quadrature nodes per axis unless configured otherwise.
pub const DEFAULT_QUAD_ORDER: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntError {
    #[error("Gaussian rate must be positive, got {0}")]
    NonPositiveBeta(String),
    #[error("weight exponent must be non-positive, got {0}")]
    PositiveWeight(String),
    #[error("integral diverges: total Gaussian exponent {0} is not negative")]
    Divergent(String),
    #[error("exact integration needs a non-negative integer prefactor power, got {0}")]
    NonIntegerPrefactor(String),
    #[error("variable count mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("quadrature order must be at least 10, got {0}")]
    OrderTooLow(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Measure `exp(gamma_pi · Σ x_i²) dx` on `ℝ^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSpec {
    gamma_pi: Rational,
    nvars: usize,
}

impl WeightSpec {
    pub fn new(nvars: usize, gamma_pi: Rational) -> Result<Self, IntError> {
        if gamma_pi.is_positive() {
            return Err(IntError::PositiveWeight(gamma_pi.to_string()));
        }
        Ok(Self { gamma_pi, nvars })
    }

    /// Plain Lebesgue measure.
    pub fn unweighted(nvars: usize) -> Self {
        Self {
            gamma_pi: Rational::zero(),
            nvars,
        }
    }

    pub fn gamma_pi(&self) -> &Rational {
        &self.gamma_pi
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
}

/// `(2m−1)!! / (2β)^m`, the rational part of `∫ x^(2m) e^(−βx²) dx`.
fn moment_rational(m: u32, beta: &Rational) -> Rational {
    let num = Rational::from_integer(double_factorial_odd(m));
    let den = (beta * rat_int(2)).pow(m as i32);
    num / den
}

/// `∏_i ∫ x_i^(k_i) e^(−β x_i²) dx_i`.
pub fn gaussian_moment(exponents: &[u32], beta: &Rational) -> Result<RadScalar, IntError> {
    if !beta.is_positive() {
        return Err(IntError::NonPositiveBeta(beta.to_string()));
    }
    if exponents.iter().any(|k| k % 2 == 1) {
        return Ok(RadScalar::zero());
    }
    let rational: Rational = exponents.iter().map(|k| moment_rational(k / 2, beta)).product();
    Ok(common_factor(exponents.len(), beta)?.scale(&rational))
}

/// `(π/β)^(N/2)`.
fn common_factor(nvars: usize, beta: &Rational) -> Result<RadScalar, IntError> {
    let root = RadScalar::sqrt_rational(&beta.recip())?;
    Ok(root.pow(nvars as u32) * RadScalar::pi_half_power(nvars as i32))
}

/// Decomposes `⟨f, g⟩` into the polynomial integrand and the positive
/// Gaussian rate, checking convergence and integrability.
fn check_arity(f: &Element, g: &Element, w: &WeightSpec) -> Result<(), IntError> {
    if f.nvars() != g.nvars() || f.nvars() != w.nvars {
        return Err(IntError::ArityMismatch {
            left: f.nvars(),
            right: g.nvars().max(w.nvars),
        });
    }
    Ok(())
}

fn integrand(f: &Element, g: &Element, w: &WeightSpec) -> Result<(Poly, Poly, Rational), IntError> {
    let total = f.gamma() + g.gamma() + &w.gamma_pi;
    if !total.is_negative() {
        return Err(IntError::Divergent(total.to_string()));
    }
    let mu = f.mu() + g.mu();
    if !is_integer(&mu) || mu.is_negative() {
        return Err(IntError::NonIntegerPrefactor(mu.to_string()));
    }
    let k = mu.to_integer();
    let k = u32::try_from(&k).map_err(|_| IntError::NonIntegerPrefactor(mu.to_string()))?;
    let left = if k == 0 {
        f.poly().clone()
    } else {
        f.poly() * &Poly::prefactor(f.nvars()).pow(k)
    };
    Ok((left, g.poly().clone(), -total))
}

/// Exact `⟨f, g⟩_π = ∫ f g e^π dx` on the real class.
pub fn inner_product_pi(f: &Element, g: &Element, w: &WeightSpec) -> Result<RadScalar, IntError> {
    check_arity(f, g, w)?;
    if f.is_zero() || g.is_zero() {
        return Ok(RadScalar::zero());
    }
    let (p, q, beta) = integrand(f, g, w)?;
    let n = f.nvars();
    let max_deg = p.degree().unwrap_or(0) + q.degree().unwrap_or(0);
    let table: Vec<Rational> = (0..=max_deg / 2).map(|m| moment_rational(m, &beta)).collect();

    // group by radical so each class sums over plain rationals
    let mut acc: BTreeMap<_, Rational> = BTreeMap::new();
    for (mp, cp) in p.terms() {
        for (mq, cq) in q.terms() {
            if mp.0.iter().zip(&mq.0).any(|(a, b)| (a + b) % 2 == 1) {
                continue;
            }
            let moment: Rational = mp
                .0
                .iter()
                .zip(&mq.0)
                .map(|(a, b)| table[((a + b) / 2) as usize].clone())
                .product();
            for (key, c) in (cp * cq).terms() {
                *acc.entry(*key).or_insert_with(Rational::zero) += c * &moment;
            }
        }
    }
    let sum = acc
        .into_iter()
        .fold(RadScalar::zero(), |s, (key, c)| s + RadScalar::term(c, key));
    Ok(sum * common_factor(n, &beta)?)
}

/// Finitely supported coordinates on the Φ side of the similarity map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TSpaceVector {
    coords: BTreeMap<Vec<u32>, RadScalar>,
}

impl TSpaceVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit vector at `index`.
    pub fn basis(index: &[u32]) -> Self {
        let mut v = Self::new();
        v.set(index, RadScalar::one());
        v
    }

    pub fn set(&mut self, index: &[u32], c: RadScalar) {
        if c.is_zero() {
            self.coords.remove(index);
        } else {
            self.coords.insert(index.to_vec(), c);
        }
    }

    pub fn coord(&self, index: &[u32]) -> RadScalar {
        self.coords.get(index).cloned().unwrap_or_else(RadScalar::zero)
    }

    pub fn coords(&self) -> impl Iterator<Item = (&Vec<u32>, &RadScalar)> {
        self.coords.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Pulled-back product, i.e. the coordinate dot product on an orthonormal
/// Φ side. Coordinates are real so no conjugation is needed.
pub fn inner_product_t(u: &TSpaceVector, v: &TSpaceVector) -> RadScalar {
    u.coords
        .iter()
        .filter_map(|(k, a)| v.coords.get(k).map(|b| a * b))
        .fold(RadScalar::zero(), |s, t| s + t)
}

/// Gauss–Hermite nodes and weights for `∫ h(y) e^(−y²) dy`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    const EPS: f64 = 1e-15;
    const MAX_ITER: usize = 100;
    let n = order;
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_ITER {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Polynomial times prefactor power, evaluated in floating point.
struct CompiledFactor {
    terms: Vec<(Vec<i32>, f64)>,
    mu: Rational,
}

impl CompiledFactor {
    fn new(e: &Element) -> Self {
        let terms = e
            .poly()
            .terms()
            .map(|(m, c)| (m.0.iter().map(|&k| k as i32).collect(), c.to_f64()))
            .collect();
        Self {
            terms,
            mu: e.mu().clone(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let p: f64 = self
            .terms
            .iter()
            .map(|(m, c)| c * m.iter().zip(x).map(|(&k, v)| v.powi(k)).product::<f64>())
            .sum();
        p * crate::funcspace::prefactor_pow_f64(x, &self.mu)
    }
}

/// Tensor-product Gauss–Hermite estimate of `⟨f, g⟩_π`. The combined
/// Gaussian is absorbed into the quadrature weight by `x = y/√β`; `f` and
/// `g` are evaluated separately without their Gaussian factors.
pub fn quad_oracle(f: &Element, g: &Element, w: &WeightSpec, order: usize) -> Result<f64, IntError> {
    if order < 10 {
        return Err(IntError::OrderTooLow(order));
    }
    check_arity(f, g, w)?;
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let total = f.gamma() + g.gamma() + &w.gamma_pi;
    if !total.is_negative() {
        return Err(IntError::Divergent(total.to_string()));
    }
    let beta = rational_to_f64(&-total);
    let scale = beta.sqrt().recip();
    let (nodes, weights) = gauss_hermite(order);
    let (ff, gg) = (CompiledFactor::new(f), CompiledFactor::new(g));
    let n = f.nvars();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut sum = 0.0;
    loop {
        let mut wt = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            x[k] = nodes[i] * scale;
            wt *= weights[i];
        }
        sum += wt * ff.eval(&x) * gg.eval(&x);
        // odometer over the tensor grid
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    Ok(sum * scale.powi(n as i32))
}

/// `|oracle − exact| / max(1, |exact|)`.
pub fn relative_gap(oracle: f64, exact: f64) -> f64 {
    (oracle - exact).abs() / exact.abs().max(1.0)
}
