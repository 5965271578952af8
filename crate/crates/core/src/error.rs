use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("matrix is not hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e}")]
    NonHermitian { row: usize, col: usize, deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("integration failed at t = {time}: step size {step:e} underflowed")]
    IntegrationFailure { time: f64, step: f64 },

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
