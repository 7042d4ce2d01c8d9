use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(#[from] supplyfrag_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status: 2 for configuration, 3 for numerical and 1 for
    /// i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
