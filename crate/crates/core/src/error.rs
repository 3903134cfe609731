use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin quantum number: {0}")]
    InvalidSpin(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("sequence: {0}")]
    Sequence(String),
    #[error("leakage out of the correctable subspace: {0}")]
    Leakage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
