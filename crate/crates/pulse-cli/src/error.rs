use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("unknown key `{key}` ({location})")]
    UnknownKey { key: String, location: String },
    #[error("{0}")]
    Inconsistent(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] pulse_core::Error),
}

impl CliError {
    /// Machine-readable tag printed on failure.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::MissingParameter(_) => "missing-parameter",
            CliError::UnknownKey { .. } => "unknown-key",
            CliError::Inconsistent(_) => "inconsistent-config",
            CliError::Parse(_) => "parse-error",
            CliError::Io(_) => "io-error",
            CliError::Core(e) => e.kind(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
