use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Numeric(phasequant::Error),

    #[error("shape checks failed: {0}")]
    Checks(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Checks(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<phasequant::Error> for CliError {
    /// Errors that can only come from bad parameters are config errors; the
    /// rest are numerical failures.
    fn from(e: phasequant::Error) -> Self {
        use phasequant::Error as E;
        match e {
            E::Domain(_) | E::Grid(_) | E::InvalidWindow(_) | E::Order(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
