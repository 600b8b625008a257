//! Differential operators with coefficients in the function class, their
//! algebra, formal adjoints and exponentials.

mod diffop;
mod exp;

pub use diffop::{monomial_span, DiffOp, MultiIndex};
pub use exp::{ad_exp, apply_exp, exp_series, AdSeries, ExpMode, ExpOutput, DEFAULT_EXP_BOUND};

use thiserror::Error;

use crate::funcspace::FuncError;
use crate::scalar::ScalarError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("operator arity mismatch: {left} vs {right} variables")]
    ArityMismatch { left: usize, right: usize },
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("formal adjoint needs coefficients without a Gaussian factor, got {0}")]
    GaussianCoefficient(String),
    #[error("formal adjoint needs integer prefactor powers, got {0}")]
    NonIntegerCoefficientPower(String),
    #[error("exponential series did not terminate within {steps} steps; next term {witness}")]
    NonTermination { steps: usize, witness: String },
    #[error("truncated exponential needs a strictly degree-lowering operator, got {0}")]
    DegreeRaising(String),
    #[error("unsupported exponential: {0}")]
    UnsupportedExponential(String),
}
