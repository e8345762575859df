use std::path::PathBuf;

use adiasched_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } | CliError::Format { .. } => EXIT_VALIDATION,
            CliError::Core(CoreError::Domain(_)) => EXIT_VALIDATION,
            CliError::Core(CoreError::NonConvergence(_)) => EXIT_NON_CONVERGENCE,
            CliError::Core(_) => EXIT_NUMERIC,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub(crate) fn format_err(path: impl Into<PathBuf>, message: impl ToString) -> CliError {
    CliError::Format {
        path: path.into(),
        message: message.to_string(),
    }
}
