use thiserror::Error;

/// Failures surfaced by the library. The `class` strings are part of the
/// CLI contract and must stay stable.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("variable {name} exceeds declared arity {limit}")]
    Arity { name: String, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {dim} exceeds enumeration limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("enumeration needs {candidates} candidates, cap is {cap}")]
    BudgetExceeded { candidates: u128, cap: u128 },
    #[error("declared fiber bound violated: {0}")]
    BoundViolation(String),
    #[error("degenerate line: {0}")]
    DegenerateLine(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn class(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::Arity { .. } => "ArityError",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::BoundViolation(_) => "BoundViolation",
            Error::DegenerateLine(_) => "DegenerateLine",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Internal(_) => "InternalError",
        }
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
