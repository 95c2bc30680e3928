use thiserror::Error;

#[derive(Debug, Error)]
pub enum LmpoError {
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate state: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("evolution breakdown: {0}")]
    Breakdown(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("state file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LmpoError>;
