//! Truncated multivariate Taylor series and a finite-difference cross-check.

mod finite_difference;
mod jet;
mod layout;

pub use finite_difference::{
    fd_derivative, fd_expression, finite_difference_oracle, richardson, DEFAULT_STEP,
};
pub use jet::{jet_arithmetic, BinaryKind, Jet, JetSpace, Operand, UnaryKind};
pub use layout::{JetLayout, MAX_DIM};
pub use crate::metric_dsl::jet_of_expression;
