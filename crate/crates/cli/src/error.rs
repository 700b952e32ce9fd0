use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; exit code 2.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Failure while computing or writing; exit code 1.
    #[error("{0}")]
    Runtime(String),
    /// Output written, but a verdict failed; exit code 1.
    #[error("{0}")]
    Verdict(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Verdict(_) => 1,
        }
    }
}

/// Precondition failures from the core are configuration errors.
pub fn config(e: wallach_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}
