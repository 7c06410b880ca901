use thiserror::Error;

#[derive(Debug, Error)]
pub enum OtError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Index errors carry the 1-based index as it would appear in a file.
    #[error("index {index} out of range 1..={bound}")]
    Index { index: usize, bound: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OtError>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(OtError::Dimension { expected, got });
    }
    Ok(())
}
