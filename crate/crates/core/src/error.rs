use thiserror::Error;

/// Errors raised by the toolkit. Each variant maps onto a distinct CLI exit
/// code and FFI status code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Bernstein parameters or bound constants violate their stated ranges.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// A martingale model definition violates its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),
    /// The requested operation needs closed-form structure the model lacks.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    /// Simulation configuration is unusable (zero paths, empty grid, ...).
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An input required by an envelope is not available for this model.
    #[error("input unavailable: {0}")]
    Unavailable(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
