use thiserror::Error;

/// Errors raised by model construction, configuration and integration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported argument: {0}")]
    UnsupportedArgument(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("root space decomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vector is not in the normal space: {0}")]
    Domain(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration {
        time: f64,
        reason: String,
        /// Last finite state before the failure.
        last_valid: Vec<f64>,
    },

    #[error("unknown model id `{0}` (expected one of sl2r, sl3r, su21, su31)")]
    UnknownModel(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
