//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("degenerate link: {0}")]
    DegenerateLink(String),

    #[error("internal dimension mismatch: {0}")]
    Dimension(String),

    #[error("no usable signal: {0}")]
    NoSignal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

impl SimError {
    /// Process exit code contract: 1 config, 2 I/O, 3 invariant failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Io(_) => 2,
            _ => 1,
        }
    }
}
