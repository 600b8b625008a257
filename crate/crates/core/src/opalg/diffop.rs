use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use super::OpError;
use crate::funcspace::{Element, GradedSeries, Monomial, Poly};
use crate::report::Check;
use crate::scalar::{is_integer, rat_int, RadScalar, Rational};

/// Multi-index of partial derivatives, one entry per variable.
pub type MultiIndex = Monomial;

/// Linear differential operator `Σ_α c_α(x) ∂^α`, normal ordered with every
/// derivative to the right of its coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOp {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Element>,
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// All multi-indices `γ ≤ α` componentwise.
fn sub_indices(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=a).map(move |g| {
                    let mut v = prefix.clone();
                    v.push(g);
                    v
                })
            })
            .collect();
    }
    out
}

/// Memoized mixed partial derivatives of one element.
struct DerivativeCache<'a> {
    base: &'a Element,
    cache: HashMap<Vec<u32>, Element>,
}

impl<'a> DerivativeCache<'a> {
    fn new(base: &'a Element) -> Self {
        Self {
            base,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, alpha: &[u32]) -> Element {
        if alpha.iter().all(|&a| a == 0) {
            return self.base.clone();
        }
        if let Some(e) = self.cache.get(alpha) {
            return e.clone();
        }
        let i = alpha.iter().position(|&a| a > 0).unwrap();
        let mut lower = alpha.to_vec();
        lower[i] -= 1;
        let d = self.get(&lower).differentiate(i);
        self.cache.insert(alpha.to_vec(), d.clone());
        d
    }
}

impl DiffOp {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(nvars: usize) -> Self {
        Self::scalar(nvars, RadScalar::one())
    }

    pub fn scalar(nvars: usize, c: RadScalar) -> Self {
        Self::multiplication(Element::constant(nvars, c))
    }

    /// Multiplication by `e`.
    pub fn multiplication(e: Element) -> Self {
        Self::term(e, Vec::new())
    }

    /// `coeff · ∂^alpha`; an empty `alpha` means order zero.
    pub fn term(coeff: Element, alpha: Vec<u32>) -> Self {
        let n = coeff.nvars();
        let alpha = if alpha.is_empty() { vec![0; n] } else { alpha };
        assert_eq!(alpha.len(), n, "multi-index length mismatch");
        let mut op = Self::zero(n);
        if !coeff.is_zero() {
            op.terms.insert(Monomial(alpha), coeff);
        }
        op
    }

    /// `∂_i` (zero-based).
    pub fn partial(nvars: usize, i: usize) -> Self {
        Self::term(Element::one(nvars), Monomial::var(nvars, i).0)
    }

    /// Multiplication by `x_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::multiplication(Element::var(nvars, i))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &Element)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &[u32]) -> Element {
        self.terms
            .get(&Monomial(alpha.to_vec()))
            .cloned()
            .unwrap_or_else(|| Element::zero(self.nvars))
    }

    /// Order-zero operators are multiplications.
    pub fn as_multiplication(&self) -> Option<Element> {
        if self.terms.keys().all(Monomial::is_one) {
            Some(self.coeff(&vec![0; self.nvars]))
        } else {
            None
        }
    }

    /// Constant multiples of the identity.
    pub fn as_scalar(&self) -> Option<RadScalar> {
        let m = self.as_multiplication()?;
        if !m.gamma().is_zero() || !m.mu().is_zero() {
            return None;
        }
        m.poly().as_constant()
    }

    fn accumulate(&mut self, alpha: MultiIndex, coeff: Element) -> Result<(), OpError> {
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.remove(&alpha) {
            Some(existing) => {
                let sum = existing.try_add(&coeff)?;
                if !sum.is_zero() {
                    self.terms.insert(alpha, sum);
                }
            }
            None => {
                self.terms.insert(alpha, coeff);
            }
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.accumulate(a.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.try_add(&other.neg())
    }

    pub fn scale(&self, c: &RadScalar) -> DiffOp {
        let mut out = Self::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(a, e)| (a.clone(), e.scale(c))).collect();
        out
    }

    pub fn scale_rational(&self, q: &Rational) -> DiffOp {
        self.scale(&RadScalar::from_rational(q.clone()))
    }

    pub fn neg(&self) -> DiffOp {
        self.scale(&RadScalar::from_int(-1))
    }

    fn check_arity(&self, other: &DiffOp) -> Result<(), OpError> {
        if self.nvars != other.nvars {
            return Err(OpError::ArityMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    /// Operator product `self ∘ other`, normal ordered by the Leibniz rule
    /// `∂^α b = Σ_{γ≤α} C(α,γ) (∂^γ b) ∂^(α−γ)`.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.check_arity(other)?;
        let mut out = Self::zero(self.nvars);
        for (beta, b) in &other.terms {
            let mut cache = DerivativeCache::new(b);
            for (alpha, a) in &self.terms {
                for gamma in sub_indices(&alpha.0) {
                    let db = cache.get(&gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let mult: i64 = alpha
                        .0
                        .iter()
                        .zip(&gamma)
                        .map(|(&al, &g)| binomial(al, g))
                        .product();
                    let idx: Vec<u32> = alpha
                        .0
                        .iter()
                        .zip(&gamma)
                        .zip(&beta.0)
                        .map(|((&al, &g), &be)| al - g + be)
                        .collect();
                    let coeff = a.mul(&db).scale_rational(&rat_int(mult));
                    out.accumulate(Monomial(idx), coeff)?;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<DiffOp, OpError> {
        let mut out = Self::identity(self.nvars);
        for _ in 0..k {
            out = self.compose(&out)?;
        }
        Ok(out)
    }

    /// `[self, other] = self∘other − other∘self`.
    pub fn commutator(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.compose(other)?.try_sub(&other.compose(self)?)
    }

    pub fn apply(&self, f: &Element) -> Result<Element, OpError> {
        if f.nvars() != self.nvars {
            return Err(OpError::ArityMismatch {
                left: self.nvars,
                right: f.nvars(),
            });
        }
        let mut cache = DerivativeCache::new(f);
        let mut out = Element::zero(self.nvars);
        for (alpha, c) in &self.terms {
            let d = cache.get(&alpha.0);
            if d.is_zero() {
                continue;
            }
            out = out.try_add(&c.mul(&d))?;
        }
        Ok(out)
    }

    /// Applies the operator to every component of a graded series and
    /// regroups the results by degree under the same cutoff.
    pub fn apply_series(&self, s: &GradedSeries) -> Result<GradedSeries, OpError> {
        let mut out = GradedSeries::new(s.nvars(), s.cutoff());
        for (_, e) in s.components() {
            out.add_element(&self.apply(e)?)?;
        }
        if s.was_truncated() {
            out.mark_truncated();
        }
        Ok(out)
    }

    /// Range `(min, max)` of the scaling-degree change over all terms, when
    /// every coefficient is homogeneous.
    pub fn degree_shift_range(&self) -> Option<(Rational, Rational)> {
        let mut range: Option<(Rational, Rational)> = None;
        for (alpha, c) in &self.terms {
            let shift = c.homogeneous_degree()? - rat_int(alpha.degree() as i64);
            range = Some(match range {
                None => (shift.clone(), shift),
                Some((lo, hi)) => (lo.min(shift.clone()), hi.max(shift)),
            });
        }
        range
    }

    fn check_adjointable(&self) -> Result<(), OpError> {
        for c in self.terms.values() {
            if !c.gamma().is_zero() {
                return Err(OpError::GaussianCoefficient(c.to_string()));
            }
            if !is_integer(c.mu()) {
                return Err(OpError::NonIntegerCoefficientPower(c.to_string()));
            }
        }
        Ok(())
    }

    /// Formal adjoint in the unweighted space: `x_i ↦ x_i`, `∂_i ↦ −∂_i`,
    /// products reversed.
    pub fn dagger(&self) -> Result<DiffOp, OpError> {
        self.star(&Rational::zero())
    }

    /// Formal adjoint for the weight `exp(gamma_pi · Σ x_i²)`:
    /// `∂_i ↦ −∂_i − 2 gamma_pi x_i`, products reversed.
    pub fn star(&self, gamma_pi: &Rational) -> Result<DiffOp, OpError> {
        self.check_adjointable()?;
        let n = self.nvars;
        let adj_partials: Vec<DiffOp> = (0..n)
            .map(|i| {
                let d = Self::partial(n, i).neg();
                if gamma_pi.is_zero() {
                    d
                } else {
                    d.try_sub(&Self::var(n, i).scale_rational(&(gamma_pi * rat_int(2))))
                        .expect("same-class terms")
                }
            })
            .collect();
        let mut out = Self::zero(n);
        for (alpha, c) in &self.terms {
            let mut lead = Self::identity(n);
            for (i, &k) in alpha.0.iter().enumerate() {
                lead = lead.compose(&adj_partials[i].pow(k)?)?;
            }
            out = out.try_add(&lead.compose(&Self::multiplication(c.clone()))?)?;
        }
        Ok(out)
    }

    /// Compares `a` and `b` on every element of `span`, reporting the first
    /// mismatch with its witness.
    pub fn equal_on_span(name: &str, a: &DiffOp, b: &DiffOp, span: &[Element]) -> Check {
        for s in span {
            let lhs = a.apply(s);
            let rhs = b.apply(s);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) if l == r => continue,
                (Ok(l), Ok(r)) => {
                    return Check::fail(name, format!("on {s}: left {l}, right {r}"));
                }
                (Err(e), _) | (_, Err(e)) => {
                    return Check::fail(name, format!("on {s}: error {e}"));
                }
            }
        }
        Check::pass(name)
    }
}

/// Every monomial of total degree `<= max_degree` in `nvars` variables.
pub fn monomial_span(nvars: usize, max_degree: u32) -> Vec<Element> {
    let mut out = Vec::new();
    fn rec(prefix: &mut Vec<u32>, nvars: usize, left: u32, out: &mut Vec<Element>) {
        if prefix.len() == nvars {
            out.push(Element::from_poly(Poly::from_exponents(prefix, RadScalar::one())));
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(prefix, nvars, left - e, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::new(), nvars, max_degree, &mut out);
    out
}

impl fmt::Display for DiffOp {
    /// `coeff*d1^2*d2 + ...`, highest multi-index first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (alpha, c)) in self.terms.iter().rev().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &k) in alpha.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*d{}", i + 1)?,
                    _ => write!(f, "*d{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl DiffOp {
    /// `1` when the operator is exactly the identity.
    pub fn is_identity(&self) -> bool {
        self.as_scalar().is_some_and(|c| c.is_one())
    }

    /// Sum of `c_k · op_k`.
    pub fn linear_combination(nvars: usize, parts: &[(Rational, &DiffOp)]) -> Result<DiffOp, OpError> {
        parts.iter().try_fold(Self::zero(nvars), |acc, (c, op)| {
            acc.try_add(&op.scale_rational(c))
        })
    }
}
