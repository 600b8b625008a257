use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::{Element, FuncError};
use crate::scalar::{rat_int, RadScalar, Rational};

/// Retained degrees go down to this value unless configured otherwise.
pub const DEFAULT_CUTOFF: i64 = -12;

/// Elements keyed by scaling degree. Components below `cutoff` are not
/// retained; `truncated` records that something was actually dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSeries {
    nvars: usize,
    terms: BTreeMap<Rational, Element>,
    cutoff: i64,
    truncated: bool,
}

/// Splits `f` by homogeneity degree without dropping anything.
pub fn homogeneous_components(f: &Element) -> GradedSeries {
    GradedSeries::from_element(f, i64::MIN)
}

impl GradedSeries {
    pub fn new(nvars: usize, cutoff: i64) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
            cutoff,
            truncated: false,
        }
    }

    pub fn from_element(f: &Element, cutoff: i64) -> Self {
        let mut out = Self::new(f.nvars(), cutoff);
        for (_, part) in f.poly().homogeneous_parts() {
            let e = Element::new(part, f.mu().clone(), f.gamma().clone());
            // a homogeneous piece stays homogeneous after canonicalization
            let deg = e.homogeneous_degree().expect("homogeneous part");
            out.add_component(deg, e).expect("components of one element are addable");
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn was_truncated(&self) -> bool {
        self.truncated
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

    pub fn components(&self) -> impl DoubleEndedIterator<Item = (&Rational, &Element)> {
        self.terms.iter()
    }

    pub fn component(&self, degree: &Rational) -> Option<&Element> {
        self.terms.get(degree)
    }

    pub fn lowest_degree(&self) -> Option<&Rational> {
        self.terms.keys().next()
    }

    pub fn highest_degree(&self) -> Option<&Rational> {
        self.terms.keys().next_back()
    }

    fn below_cutoff(&self, degree: &Rational) -> bool {
        self.cutoff != i64::MIN && *degree < rat_int(self.cutoff)
    }

    /// Adds `e` (homogeneous of `degree`) into the series; dropped and flagged
    /// when below the cutoff.
    pub fn add_component(&mut self, degree: Rational, e: Element) -> Result<(), FuncError> {
        if e.is_zero() {
            return Ok(());
        }
        if self.below_cutoff(&degree) {
            self.truncated = true;
            return Ok(());
        }
        match self.terms.remove(&degree) {
            Some(existing) => {
                let sum = existing.try_add(&e)?;
                if !sum.is_zero() {
                    self.terms.insert(degree, sum);
                }
            }
            None => {
                self.terms.insert(degree, e);
            }
        }
        Ok(())
    }

    /// Adds every homogeneous component of `f`.
    pub fn add_element(&mut self, f: &Element) -> Result<(), FuncError> {
        for (d, e) in homogeneous_components(f).terms {
            self.add_component(d, e)?;
        }
        Ok(())
    }

    /// Sum with the larger of the two cutoffs.
    pub fn try_add(&self, other: &GradedSeries) -> Result<GradedSeries, FuncError> {
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        out.truncated |= other.truncated;
        out.drop_below_cutoff();
        for (d, e) in &other.terms {
            out.add_component(d.clone(), e.clone())?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &GradedSeries) -> Result<GradedSeries, FuncError> {
        self.try_add(&other.scale(&RadScalar::from_int(-1)))
    }

    pub fn scale(&self, c: &RadScalar) -> GradedSeries {
        let mut out = Self::new(self.nvars, self.cutoff);
        out.truncated = self.truncated;
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(d, e)| (d.clone(), e.scale(c))).collect();
        out
    }

    /// Multiplies every component by the homogeneous element `f`. The valid
    /// range moves up with the degree of `f`, so the cutoff does too.
    pub fn mul_homogeneous(&self, f: &Element) -> Result<GradedSeries, FuncError> {
        let shift = f
            .homogeneous_degree()
            .ok_or_else(|| FuncError::NotHomogeneous(f.to_string()))?;
        let mut out = self.clone();
        if shift > Rational::zero() && self.cutoff != i64::MIN {
            let raise = shift.ceil().to_integer();
            out.cutoff = self.cutoff + i64::try_from(raise).unwrap_or(i64::MAX / 4);
            out.truncated = true;
        }
        out.terms = self
            .terms
            .iter()
            .map(|(d, e)| (d + &shift, e.mul(f)))
            .filter(|(_, e)| !e.is_zero())
            .collect();
        out.drop_below_cutoff();
        Ok(out)
    }

    /// Sets a new cutoff (never lowers it) and drops what falls below.
    pub fn truncate_at(&self, cutoff: i64) -> GradedSeries {
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(cutoff);
        out.drop_below_cutoff();
        out
    }

    fn drop_below_cutoff(&mut self) {
        if self.cutoff == i64::MIN {
            return;
        }
        let c = rat_int(self.cutoff);
        let kept = self.terms.split_off(&c);
        if !self.terms.is_empty() {
            self.truncated = true;
        }
        self.terms = kept;
    }

    /// Component-wise D2 symmetrization.
    pub fn symmetrize_d2(&self) -> Result<GradedSeries, FuncError> {
        let mut out = Self::new(self.nvars, self.cutoff);
        out.truncated = self.truncated;
        for (d, e) in &self.terms {
            out.add_component(d.clone(), e.symmetrize_d2()?)?;
        }
        Ok(out)
    }

    /// Sum of the retained components as a single element.
    pub fn sum(&self) -> Result<Element, FuncError> {
        self.terms
            .values()
            .try_fold(Element::zero(self.nvars), |acc, e| acc.try_add(e))
    }

    /// Flags the series as missing components below its cutoff.
    pub fn mark_truncated(&mut self) {
        self.truncated = true;
    }

    /// Same components with no cutoff, so later operations keep everything.
    pub fn without_cutoff(&self) -> GradedSeries {
        let mut out = self.clone();
        out.cutoff = i64::MIN;
        out
    }

    /// Degrees carrying nonzero components.
    pub fn support(&self) -> Vec<Rational> {
        self.terms.keys().cloned().collect()
    }

    pub fn has_support_at_or_above(&self, degree: &Rational) -> bool {
        self.terms.keys().any(|d| d >= degree)
    }
}

impl fmt::Display for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (d, e)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "deg {d}: {e}")?;
        }
        write!(f, "}}")?;
        if self.truncated {
            write!(f, " [truncated below {}]", self.cutoff)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Poly;
    use crate::scalar::rat;

    fn x(i: usize) -> Element {
        Element::var(2, i)
    }

    #[test]
    fn components_by_degree() {
        let f = x(0).mul(&x(0)).try_add(&x(0).mul(&x(1))).unwrap().try_add(&Element::one(2)).unwrap();
        let g = homogeneous_components(&f);
        assert_eq!(g.support(), vec![rat_int(0), rat_int(2)]);
        assert_eq!(g.component(&rat_int(0)), Some(&Element::one(2)));
    }

    #[test]
    fn prefactor_contributes_negative_degree() {
        let f = x(0).mul(&x(0)).mul(&Element::prefactor_power(2, rat_int(-1)));
        let g = homogeneous_components(&f);
        assert_eq!(g.support(), vec![rat_int(0)]);
    }

    #[test]
    fn zero_gives_empty_series() {
        assert!(homogeneous_components(&Element::zero(2)).is_empty());
    }

    #[test]
    fn cutoff_drops_and_flags() {
        let f = Element::one(2).try_add(&Element::prefactor_power(2, rat_int(-3))).unwrap();
        let g = GradedSeries::from_element(&f, -4);
        assert_eq!(g.support(), vec![rat_int(0)]);
        assert!(g.was_truncated());
    }

    #[test]
    fn multiplication_raises_cutoff() {
        let f = Element::from_poly(Poly::one(2));
        let g = GradedSeries::from_element(&f, -2);
        let h = g.mul_homogeneous(&x(0)).unwrap();
        assert_eq!(h.cutoff(), -1);
        assert_eq!(h.support(), vec![rat_int(1)]);
        assert!(g.scale(&RadScalar::from_rational(rat(1, 2))).sum().unwrap() == f.scale_rational(&rat(1, 2)));
    }
}
