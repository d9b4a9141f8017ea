use std::path::PathBuf;

use thiserror::Error;
use vpp_core::VppError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error(transparent)]
    Solver(VppError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} acceptance criteria failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 validation, 2 solver failure, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Invalid { .. } => 1,
            CliError::Solver(e) if e.is_solver_failure() => 2,
            CliError::Solver(VppError::NonFinite(_)) => 2,
            CliError::Solver(VppError::Step { source, .. })
                if matches!(**source, VppError::NonFinite(_)) =>
            {
                2
            }
            CliError::Solver(e) if e.is_sink_failure() => 3,
            CliError::Solver(_) => 1,
            CliError::Io { .. } => 3,
            CliError::Verification { .. } => 2,
        }
    }
}

impl From<VppError> for CliError {
    fn from(e: VppError) -> Self {
        CliError::Solver(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
