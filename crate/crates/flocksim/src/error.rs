use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field violated an invariant.
    #[error("invalid config: {0}")]
    Validation(String),

    /// Vector dimensions did not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The Gram matrix could not be factorized (singular or indefinite).
    /// Surfaced instead of silently regularizing.
    #[error("divergence: {0}")]
    Divergence(String),

    /// An operation received an empty or too-small input.
    #[error("{0}")]
    EmptyInput(String),

    /// A non-finite number showed up where a finite one was required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A statistical routine could not produce a defined answer.
    #[error("statistics error: {0}")]
    Stats(String),

    /// Log replay hit a malformed line.
    #[error("log parse error at line {line}: {message}")]
    LogParse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
