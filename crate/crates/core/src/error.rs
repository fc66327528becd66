use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("size error: {0}")]
    Size(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("parameter outside model domain: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown {kind} `{name}` (known: {known})")]
    Unknown {
        kind: &'static str,
        name: String,
        known: String,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
