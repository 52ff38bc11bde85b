use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema violation; `path` locates the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] pairsim_core::Error),

    #[error("i/o error: {0}")]
    Io(String),

    /// Some sweep points failed; the table was still written.
    #[error("{failed} of {total} sweep points failed")]
    SweepFailures { failed: usize, total: usize },
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 2 for bad configuration, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Model(e) if e.is_numeric() => 3,
            CliError::Model(pairsim_core::Error::Io(_)) | CliError::Io(_) => 1,
            CliError::Model(_) => 2,
            CliError::SweepFailures { .. } => 3,
        }
    }
}
