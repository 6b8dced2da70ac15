use serde_json::json;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SUITE_FAILED: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qlab_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) if e.is_validation() => "validation",
            CliError::Core(_) => "runtime",
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_validation() => exit::VALIDATION,
            CliError::Usage(_) | CliError::Config(_) => exit::VALIDATION,
            _ => exit::RUNTIME,
        }
    }

    /// Single-line JSON for the error stream.
    pub fn to_json_line(&self) -> String {
        json!({"error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code()}).to_string()
    }
}
