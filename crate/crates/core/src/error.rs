use thiserror::Error;

use crate::expr::{EvalError, ExprError, ParseError};
use crate::smalllin::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("expression vanishes at sample {index}")]
    ZeroValue { index: usize },
    #[error("partial derivative {index} vanishes")]
    ZeroDerivative { index: usize },
    #[error("outer derivative F'(u) vanishes at u = {u}")]
    ZeroFPrime { u: f64 },
    #[error("identity requires degree != 1; use the composite Hessian identity instead")]
    DegreeOne,
    #[error("degree must be nonzero")]
    DegreeZero,
    #[error("function is not linearly homogeneous (degree estimate {degree}, spread {spread})")]
    NotLinearlyHomogeneous { degree: f64, spread: f64 },
    #[error("inconsistent classification: {0}")]
    Inconsistent(String),
    #[error("unsupported outer function: {0}")]
    UnsupportedOuter(String),
    #[error("analytic and numerical verdicts disagree: {0}")]
    Mismatch(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}
