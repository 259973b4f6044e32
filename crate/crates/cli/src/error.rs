use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario or an argument is unusable; nothing was computed.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Validation {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn runtime(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {err}"))
    }

    /// Process exit status: 2 for validation failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
