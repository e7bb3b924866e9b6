use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Library(#[from] linflow::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn context(self, what: &str) -> CliError {
        match self {
            CliError::Input(msg) => CliError::Input(format!("{what}: {msg}")),
            other => other,
        }
    }

    /// 2 for bad input, 3 when two independent computations disagreed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_internal() => 3,
            _ => 2,
        }
    }
}
