use thiserror::Error;

use crate::stencil::VerifyReport;
use crate::Rational;

pub type Result<T, E = FdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FdError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid function has no sample at index {index}")]
    MissingSample { index: Rational },

    #[error("truncation {truncation} must exceed the differentiation order {order}")]
    Truncation { truncation: u32, order: u32 },

    #[error(
        "degenerate choice #{choice}: operator of order {operator_order} cannot cancel \
         the error term of order {pending}"
    )]
    DegenerateChoice {
        choice: usize,
        operator_order: u32,
        pending: u32,
    },

    #[error("choice #{choice} is evaluated at {found}, the base operator at {expected}")]
    MismatchedBase {
        choice: usize,
        expected: Box<Rational>,
        found: Box<Rational>,
    },

    #[error("choices reach order {achieved}, below the requested order {target}")]
    TargetNotReached { achieved: u32, target: u32 },

    #[error("moment system is singular: {0}")]
    Singular(String),

    #[error("nodes cannot support order {order} for derivative {derivative}: moment {moment} fails")]
    OrderUnattainable { derivative: u32, order: u32, moment: u32 },

    #[error("stencil verification failed: {0}")]
    Verification(Box<VerifyReport>),

    #[error("invalid formula id `{0}`")]
    FormulaId(String),

    #[error("invalid rational `{0}`")]
    ParseRational(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
