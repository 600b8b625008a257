//! The function class every vector lives in:
//! polynomial × `∏_{i<j}(x_i² − x_j²)^μ` × `exp(γ Σ x_i²)`.

mod element;
mod graded;
mod poly;

pub use element::{prefactor_pow_f64, Element};
pub use graded::{homogeneous_components, GradedSeries, DEFAULT_CUTOFF};
pub use poly::{Monomial, Poly};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error("cannot add elements with Gaussian exponents {left} and {right}")]
    IncompatibleGaussian { left: String, right: String },
    #[error("cannot align prefactor powers {left} and {right}")]
    NonAlignablePrefactor { left: String, right: String },
    #[error("operation needs an integer prefactor power, got {0}")]
    NonIntegerPrefactor(String),
    #[error("operation needs {expected} variables, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("element {0} is not invertible in the class")]
    NotInvertible(String),
    #[error("element {0} is not homogeneous")]
    NotHomogeneous(String),
}
