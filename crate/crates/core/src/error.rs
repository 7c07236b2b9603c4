use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("empty request: {0}")]
    EmptyRequest(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate conditioning: photon projection has probability {0:e}")]
    DegenerateConditioning(f64),

    #[error("infinite precession period: no Hadamard timing exists at B = {0} T")]
    InfinitePeriod(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unidentifiable dataset: missing traces {missing:?}")]
    Identifiability { missing: Vec<String> },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
