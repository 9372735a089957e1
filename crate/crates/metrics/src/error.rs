use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch(Vec<usize>, Vec<usize>),

    #[error("image too small: need at least {need}x{need}, got {h}x{w}")]
    ImageTooSmall { need: usize, h: usize, w: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("no valid pixels: {0}")]
    NoValidPixels(String),

    #[error("invalid metric value: {0}")]
    InvalidValue(String),
}

pub type Result<T> = std::result::Result<T, MetricError>;
