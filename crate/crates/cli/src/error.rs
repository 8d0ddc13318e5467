use std::path::PathBuf;

use thiserror::Error;

/// Everything that stops a run before a report exists. Failed checks are not
/// errors: they end up in the report and set exit status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("computation failed: {0}")]
    Compute(#[from] cayley_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Unreadable { .. } => exit::UNREADABLE,
            CliError::Malformed { .. } => exit::MALFORMED,
            CliError::Unwritable { .. } | CliError::Compute(_) => exit::COMPUTATION,
        }
    }
}

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECKS_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const UNREADABLE: i32 = 3;
    pub const MALFORMED: i32 = 4;
    pub const COMPUTATION: i32 = 5;
}

pub type Result<T> = std::result::Result<T, CliError>;
