use num_traits::Zero;

use super::{DiffOp, OpError};
use crate::funcspace::{Element, GradedSeries, Monomial, Poly};
use crate::scalar::{RadScalar, Rational};

pub const DEFAULT_EXP_BOUND: usize = 64;

const WITNESS_LEN: usize = 240;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMode {
    /// The series must vanish identically after at most `bound` terms.
    Exact { bound: usize },
    /// Components below `cutoff` are dropped; the operator must lower degree.
    Truncated { bound: usize, cutoff: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpOutput {
    Exact { value: Element, steps: usize },
    Truncated(GradedSeries),
}

impl ExpOutput {
    pub fn into_series(self, cutoff: i64) -> GradedSeries {
        match self {
            ExpOutput::Exact { value, .. } => GradedSeries::from_element(&value, cutoff),
            ExpOutput::Truncated(s) => s,
        }
    }

    pub fn exact(self) -> Option<Element> {
        match self {
            ExpOutput::Exact { value, .. } => Some(value),
            ExpOutput::Truncated(_) => None,
        }
    }
}

fn clip(s: String) -> String {
    if s.len() <= WITNESS_LEN {
        return s;
    }
    let mut end = WITNESS_LEN;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

/// `κ` when `op` is multiplication by `κ Σ x_i²`.
fn radial_gaussian_rate(op: &DiffOp) -> Option<Rational> {
    let m = op.as_multiplication()?;
    if !m.mu().is_zero() || !m.gamma().is_zero() || m.is_zero() {
        return None;
    }
    let n = op.nvars();
    let mut sq = Monomial::one(n);
    sq.0[0] = 2;
    let kappa = m.poly().coeff(&sq).as_rational()?;
    (*m.poly() == Poly::radius_squared(n).scale_rational(&kappa)).then_some(kappa)
}

/// `exp(c · op) f`.
///
/// Multiplication by `κ Σ x_i²` is handled in closed form as a shift of the
/// Gaussian exponent. Everything else is summed term by term.
pub fn apply_exp(c: &RadScalar, op: &DiffOp, f: &Element, mode: ExpMode) -> Result<ExpOutput, OpError> {
    if let Some(kappa) = radial_gaussian_rate(op) {
        let rate = c
            .as_rational()
            .ok_or_else(|| OpError::UnsupportedExponential(format!("irrational rate {c} for Gaussian shift")))?;
        let value = f.shift_gaussian(&(rate * kappa));
        return Ok(match mode {
            ExpMode::Exact { .. } => ExpOutput::Exact { value, steps: 0 },
            ExpMode::Truncated { cutoff, .. } => ExpOutput::Truncated(GradedSeries::from_element(&value, cutoff)),
        });
    }
    match mode {
        ExpMode::Exact { bound } => {
            let mut sum = f.clone();
            let mut term = f.clone();
            for k in 1..=bound {
                term = op.apply(&term)?.scale(&c.scale(&Rational::new(1.into(), (k as i64).into())));
                if term.is_zero() {
                    return Ok(ExpOutput::Exact { value: sum, steps: k - 1 });
                }
                sum = sum.try_add(&term)?;
            }
            Err(OpError::NonTermination {
                steps: bound,
                witness: clip(term.to_string()),
            })
        }
        ExpMode::Truncated { bound, cutoff } => {
            let s = GradedSeries::from_element(f, cutoff);
            exp_series(c, op, &s, bound).map(ExpOutput::Truncated)
        }
    }
}

/// `exp(c · op)` applied to a graded series; `op` must strictly lower degree
/// so that the cutoff ends the sum.
pub fn exp_series(c: &RadScalar, op: &DiffOp, s: &GradedSeries, bound: usize) -> Result<GradedSeries, OpError> {
    match op.degree_shift_range() {
        Some((_, hi)) if hi < Rational::zero() => {}
        _ => return Err(OpError::DegreeRaising(clip(op.to_string()))),
    }
    let mut sum = s.clone();
    let mut term = s.clone();
    for k in 1..=bound {
        term = op.apply_series(&term)?.scale(&c.scale(&Rational::new(1.into(), (k as i64).into())));
        let dropped = term.was_truncated();
        sum = sum.try_add(&term)?;
        if dropped {
            sum.mark_truncated();
        }
        if term.is_empty() {
            return Ok(sum);
        }
    }
    Err(OpError::NonTermination {
        steps: bound,
        witness: clip(term.to_string()),
    })
}

/// `exp(c·X) Y exp(−c·X) = Σ_k c^k/k! ad_X^k(Y)` when the nested commutators
/// vanish eventually.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdSeries {
    pub sum: DiffOp,
    /// `c^k/k! ad_X^k(Y)` for each `k` up to the last nonzero one.
    pub terms: Vec<DiffOp>,
}

pub fn ad_exp(c: &RadScalar, x: &DiffOp, y: &DiffOp, bound: usize) -> Result<AdSeries, OpError> {
    let mut terms = vec![y.clone()];
    let mut sum = y.clone();
    let mut term = y.clone();
    for k in 1..=bound {
        term = x.commutator(&term)?.scale(&c.scale(&Rational::new(1.into(), (k as i64).into())));
        if term.is_zero() {
            return Ok(AdSeries { sum, terms });
        }
        sum = sum.try_add(&term)?;
        terms.push(term.clone());
    }
    Err(OpError::NonTermination {
        steps: bound,
        witness: clip(term.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn lap(n: usize) -> DiffOp {
        (0..n)
            .map(|i| DiffOp::partial(n, i).pow(2).unwrap())
            .fold(DiffOp::zero(n), |a, b| a.try_add(&b).unwrap())
    }

    #[test]
    fn heat_kernel_on_quadratic() {
        // exp(t∇²) x1² = x1² + 2t
        let f = Element::monomial(&[2, 0]);
        let t = RadScalar::from_rational(rat(1, 4));
        let out = apply_exp(&t, &lap(2), &f, ExpMode::Exact { bound: 8 }).unwrap();
        let expected = f.try_add(&Element::constant(2, RadScalar::from_rational(rat(1, 2)))).unwrap();
        assert_eq!(out, ExpOutput::Exact { value: expected, steps: 1 });
    }

    #[test]
    fn gaussian_shift() {
        let x2 = DiffOp::multiplication(Element::from_poly(Poly::radius_squared(2)));
        let f = Element::gaussian(2, rat(-1, 2));
        let out = apply_exp(&RadScalar::from_rational(rat(1, 4)), &x2, &f, ExpMode::Exact { bound: 4 })
            .unwrap()
            .exact()
            .unwrap();
        assert_eq!(out, Element::gaussian(2, rat(-1, 4)));
    }

    #[test]
    fn non_terminating_reports_witness() {
        let euler = DiffOp::var(2, 0).compose(&DiffOp::partial(2, 0)).unwrap();
        let f = Element::monomial(&[1, 0]);
        let err = apply_exp(&RadScalar::one(), &euler, &f, ExpMode::Exact { bound: 5 }).unwrap_err();
        match err {
            OpError::NonTermination { steps, witness } => {
                assert_eq!(steps, 5);
                assert_eq!(witness, "(1/120*x1)");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn truncated_rejects_degree_preserving() {
        let euler = DiffOp::var(2, 0).compose(&DiffOp::partial(2, 0)).unwrap();
        let f = Element::monomial(&[1, 0]);
        let mode = ExpMode::Truncated { bound: 8, cutoff: -4 };
        assert!(matches!(apply_exp(&RadScalar::one(), &euler, &f, mode), Err(OpError::DegreeRaising(_))));
    }

    #[test]
    fn truncated_matches_exact_when_finite() {
        let f = Element::monomial(&[4, 2]);
        let c = RadScalar::from_rational(rat(-1, 3));
        let exact = apply_exp(&c, &lap(2), &f, ExpMode::Exact { bound: 8 }).unwrap().exact().unwrap();
        let trunc = apply_exp(&c, &lap(2), &f, ExpMode::Truncated { bound: 8, cutoff: -2 }).unwrap();
        assert_eq!(trunc.into_series(-2).sum().unwrap(), exact);
    }

    #[test]
    fn ad_series_of_laplacian_on_euler() {
        // [∇², O_E] = 2∇², [∇², ∇²] = 0
        let n = 2;
        let euler = (0..n)
            .map(|i| DiffOp::var(n, i).compose(&DiffOp::partial(n, i)).unwrap())
            .fold(DiffOp::zero(n), |a, b| a.try_add(&b).unwrap());
        let c = RadScalar::from_rational(rat(1, 2));
        let ad = ad_exp(&c, &lap(n), &euler, 8).unwrap();
        assert_eq!(ad.terms.len(), 2);
        assert_eq!(ad.terms[1], lap(n));
        assert_eq!(ad.sum, euler.try_add(&lap(n)).unwrap());
    }
}
