use thiserror::Error;

/// Errors raised by the soliton library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or inconsistent parameters.
    #[error("config error: {0}")]
    Config(String),

    /// An iterative solver failed to reach its tolerance.
    #[error("nonconvergence: {message} (last residual {residual:e})")]
    NonConvergence { message: String, residual: f64 },

    /// A problem that admits no solution, with the obstruction spelled out.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The requested check is not available for this ambient or profile.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A sample point where the geometry degenerates.
    #[error("singular sample at index {index}: {message}")]
    Singular { index: usize, message: String },

    /// Expression parsing failure, with byte offset.
    #[error("parse error at {pos}: {message}")]
    Parse { pos: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::NonConvergence { .. } => "nonconvergence",
            Error::Infeasible(_) => "infeasible",
            Error::Unsupported(_) => "unsupported",
            Error::Singular { .. } => "singular",
            Error::Parse { .. } => "parse",
        }
    }
}
