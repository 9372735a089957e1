use thiserror::Error;

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error(transparent)]
    Core(#[from] uie_core::Error),
}

pub type Result<T> = std::result::Result<T, PriorError>;

pub(crate) fn param(name: &'static str, message: impl Into<String>) -> PriorError {
    PriorError::InvalidParameter {
        name,
        message: message.into(),
    }
}
