use thiserror::Error;

/// Errors produced by model construction, solvers and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("prior table is not discretely convex: {0}")]
    NonConvexPrior(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("enumeration budget exceeded: {states} states > cap {cap}")]
    BudgetExceeded { states: u128, cap: u128 },

    #[error("solver refused: {0}")]
    Refused(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
