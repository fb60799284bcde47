use thiserror::Error;

/// Errors raised by the operator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the operator is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or non-finite input data.
    #[error("input error: {0}")]
    Input(String),
    /// An angular grid cannot resolve the requested harmonic degree.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// The brute-force oracle refused a job larger than its budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Mode-series evaluation without a usable coefficient bound.
    #[error("divergence guard: {0}")]
    Divergence(String),
    /// A reflection or other structural contract was violated.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsupported domain: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
