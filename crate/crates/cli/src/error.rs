use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(#[from] kzqsl_core::Error),
    #[error("i/o failure: {0}")]
    Io(String),
}

/// Machine-readable form printed to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: match self {
                CliError::Config(_) => "validation",
                CliError::Compute(_) => "computation",
                CliError::Io(_) => "io",
            },
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}
