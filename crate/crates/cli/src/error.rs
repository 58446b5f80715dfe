use thiserror::Error;

/// Exit codes: 0 pass, 1 verification failure, 2 usage or configuration
/// error, 3 numeric or domain error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{context}: {source}")]
    Numeric { context: String, source: finsler_ricci::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Numeric { .. } => 3,
        }
    }

    pub fn config(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
        CliError::Config { path: path.to_string(), msg: msg.to_string() }
    }
}

/// Attaches context to numeric errors.
pub trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for finsler_ricci::Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numeric { context: ctx(), source })
    }
}
