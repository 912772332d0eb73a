use std::path::PathBuf;

use thiserror::Error;

/// Command failures, each mapped to a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{line}:{column}: invalid value for `{key}`: {message}")]
    Parse {
        key: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("invalid `{key}`: {source}")]
    Domain {
        key: String,
        source: qtraj_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Budget(qtraj_core::Error),
}

impl CliError {
    pub(crate) fn field(key: &str, source: qtraj_core::Error) -> Self {
        CliError::Domain {
            key: key.into(),
            source,
        }
    }

    /// Routes simulation errors raised after validation.
    pub(crate) fn sim(source: qtraj_core::Error) -> Self {
        match source {
            qtraj_core::Error::BudgetExceeded { .. } => CliError::Budget(source),
            other => CliError::Domain {
                key: "scenario".into(),
                source: other,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Domain { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Budget(_) => 5,
        }
    }
}
