use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: expected about {expected:.3e} events, limit {limit:.3e}")]
    Capacity { expected: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Not enough history (or future data) around the evaluation time.
    #[error("insufficient data at t = {t}: need {needed} bins, have {available}")]
    Boundary {
        t: f64,
        needed: usize,
        available: usize,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, surfaced by the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Capacity { .. } => "capacity",
            Error::Config(_) => "config",
            Error::Boundary { .. } => "boundary",
            Error::Input(_) => "input",
            Error::Estimation(_) => "estimation",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
