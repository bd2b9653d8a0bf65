use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("dense evaluation does not fit: {0}")]
    Capacity(String),
    #[error("verification failed: {}", .0.join("; "))]
    Verification(Vec<String>),
    #[error(transparent)]
    Core(pbsp_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config file {path}: {message}")]
    Config { path: String, message: String },
}

impl CliError {
    /// 0 success, 1 verification failure, 2 usage error, 3 capacity error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Capacity(_) => 3,
            CliError::Core(pbsp_core::Error::Capacity { .. }) => 3,
            CliError::Core(pbsp_core::Error::Domain(_)) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<pbsp_core::Error> for CliError {
    fn from(e: pbsp_core::Error) -> Self {
        match e {
            pbsp_core::Error::Capacity { required, budget } => {
                CliError::Capacity(format!("needs dimension {required}, budget is {budget} (raise --dense-budget)"))
            }
            other => CliError::Core(other),
        }
    }
}
