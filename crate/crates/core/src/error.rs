use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("factorization of `{matrix}` broke down at row {row} (pivot {pivot:e})")]
    Factorization { matrix: String, row: usize, pivot: f64 },

    #[error("dense solve refused: N = {n} exceeds the dense cap {cap}; use the shift-invert solver")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("requested {requested} eigenpairs but the problem has only {available}")]
    TooManyEigenpairs { requested: usize, available: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible sequence data: {0}")]
    Infeasible(String),

    #[error("oracle out of range: {0}")]
    OracleRange(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
