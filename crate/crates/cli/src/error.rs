use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tactile_core::Error),
}

impl CliError {
    /// 1 usage or config, 2 data validation, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        use tactile_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(E::Io(_) | E::InvalidArgument(_) | E::Protocol(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
