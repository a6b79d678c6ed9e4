use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("requested jet order {requested} exceeds the maximum depth {max}")]
    Capability { requested: usize, max: usize },

    #[error("non-finite value encountered in {0}")]
    Numerical(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown system '{0}'")]
    UnknownSystem(String),

    #[error("cannot normalize a template whose initial value is zero")]
    ZeroTemplate,

    #[error("insufficient samples for rate fit: {found} in window, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("parse error in '{expr}' at column {column}: {message}")]
    Parse { expr: String, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
