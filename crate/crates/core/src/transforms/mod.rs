//! Conditional transforms `E_x[e^{⟨u, X_t⟩}]`.
//!
//! [`riccati`] builds and integrates the polynomial Riccati system, the
//! [`oracle`] evaluates the matrix exponential of the generator directly, and
//! [`closed_form`] has the explicit one-dimensional solution.

pub mod closed_form;
pub mod ode;
pub mod oracle;
pub mod polynomial;
pub mod riccati;
pub mod zeros;

pub use closed_form::closed_form_1d;
pub use ode::{SolverOptions, ToleranceNotMet};
pub use oracle::transform_oracle;
pub use polynomial::SparsePolynomial;
pub use riccati::{
    build_riccati, decompose_kernel, solve_riccati, solve_riccati_with, KernelDecomposition, ModelTransform,
    RiccatiSystem, TransformValue,
};
pub use zeros::{find_psi_zero, SearchRectangle};

use crate::counters::CounterError;
use crate::model::{ModelError, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("model is not in counter coordinates: {0}")]
    NotCounterCoordinates(String),
    #[error("atom {jump:?} of measure nu{measure} does not clear to a polynomial")]
    NonPolynomialSystem { measure: usize, jump: Point },
    #[error(transparent)]
    ToleranceNotMet(#[from] ToleranceNotMet),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Counter(#[from] CounterError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
