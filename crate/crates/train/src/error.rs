use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error(transparent)]
    Net(#[from] uie_net::NetError),

    #[error(transparent)]
    Core(#[from] uie_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TrainError>;

pub(crate) fn dim_err(expected: impl Into<String>, got: impl Into<String>) -> TrainError {
    TrainError::DimensionMismatch {
        expected: expected.into(),
        got: got.into(),
    }
}

pub(crate) fn cfg_err(msg: impl Into<String>) -> TrainError {
    TrainError::Config(msg.into())
}
