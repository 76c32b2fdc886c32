use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error("{context}: {source}")]
    Core { context: String, source: heatwave_core::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::File { .. } => 2,
            CliError::Core { source, .. } if source.is_input_error() || matches!(source, heatwave_core::Error::InvalidParams(_)) => 2,
            CliError::Core { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T>;
}

impl<T> Context<T> for heatwave_core::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|source| CliError::Core { context: what.into(), source })
    }
}
