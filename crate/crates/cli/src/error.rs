use antibunch::model::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] antibunch::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use antibunch::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Library(E::Config(_) | E::Unsupported(_) | E::Domain(_)) => 2,
            CliError::Library(_) | CliError::Io(_) => 1,
        }
    }
}
