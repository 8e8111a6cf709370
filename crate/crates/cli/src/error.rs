use mcf_solitons::report::{to_json, SCHEMA_VERSION};
use serde::Serialize;

/// Process exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] mcf_solitons::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(mcf_solitons::Error::NonConvergence { .. } | mcf_solitons::Error::Singular { .. }) => {
                EXIT_NONCONVERGENCE
            }
            CliError::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_CONFIG,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Library(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Verification(_) => "verification",
        }
    }

    /// One-line JSON record for the error stream.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            schema_version: &'a str,
            error: &'a str,
            exit_code: u8,
            message: String,
        }
        to_json(&Record { schema_version: SCHEMA_VERSION, error: self.kind(), exit_code: self.exit_code(), message: self.to_string() })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
