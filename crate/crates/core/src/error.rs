use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty feature column `{0}`")]
    EmptyFeature(String),

    #[error("feature `{feature}`: unseen category {value}")]
    UnseenCategory { feature: String, value: f64 },

    #[error("arity mismatch: expected {expected} values, got {actual}")]
    Arity { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("model document line {line}: {message}")]
    Model { line: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad hyperparameters or numeric settings
    /// rather than bad input data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
