use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A result was produced but failed a numerical check.
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] optomech_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use optomech_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                E::InvalidParameter { .. }
                | E::Domain { .. }
                | E::NegativeQuadraticCoupling { .. }
                | E::Parse { .. }
                | E::GridTooCoarse { .. } => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            },
            CliError::Io { .. } | CliError::Json(_) => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
