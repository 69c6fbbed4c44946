use thiserror::Error;

/// Errors produced by the forecasting engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or layer dimensions do not line up.
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// Invalid configuration value or inconsistent config blocks.
    #[error("config error: {0}")]
    Config(String),

    /// A computation produced or received a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An operation was invoked in a state that does not support it.
    #[error("state error: {0}")]
    State(String),

    /// File or stream I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input data (CSV cell, model file, config file).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    /// Process exit code class: 2 for configuration problems, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Shape { .. } => 2,
            Error::Numeric(_) | Error::State(_) | Error::Io(_) => 3,
        }
    }
}
