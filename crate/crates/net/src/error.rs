use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] uie_core::Error),
}

pub type Result<T> = std::result::Result<T, NetError>;

pub(crate) fn dim_err(expected: impl Into<String>, got: impl Into<String>) -> NetError {
    NetError::DimensionMismatch {
        expected: expected.into(),
        got: got.into(),
    }
}
