use thiserror::Error;

/// Failures of a command, each tied to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or spec. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A check ran to completion and did not pass. Exit code 1.
    #[error("{0}")]
    Failed(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<breather_core::Error> for CliError {
    fn from(e: breather_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
