use chain_scattering::ScatterError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical contract violation: {0}")]
    Numerical(String),

    #[error("numerical error: {0}")]
    Library(#[from] ScatterError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn field(field: &str, message: impl std::fmt::Display) -> Self {
        CliError::Config(format!("field `{field}`: {message}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Library(_) => 3,
            CliError::Io(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
