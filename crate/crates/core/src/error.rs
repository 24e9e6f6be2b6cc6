use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parity error: {0}")]
    Parity(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("graph not connected: {0}")]
    Connectivity(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("not integrable: {0}")]
    Integrability(String),

    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("range error: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;
