use thiserror::Error;

#[derive(Debug, Error)]
pub enum TeaserError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid training set: {0}")]
    InvalidTrainingSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// The snapshot is shorter than the slave's sliding window.
    #[error("snapshot of length {len} is shorter than window length {window}")]
    TooShort { len: usize, window: usize },

    #[error("invalid stream state: {0}")]
    InvalidState(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TeaserError>;
