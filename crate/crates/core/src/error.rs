use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("value outside representable range: {0}")]
    Range(String),
    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },
    #[error("root search failed: {0}")]
    Root(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error stems from malformed or inconsistent user input.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Io(_) | Error::Json(_))
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
