use std::path::PathBuf;

/// Everything a command can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] crembo_core::Error),
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input or usage, 1 for failures of the pipeline itself.
    pub fn exit_code(&self) -> i32 {
        use crembo_core::Error as E;
        match self {
            CliError::Core(E::ConstraintViolation { .. } | E::LearnerAlwaysFails | E::AllEpsilonInfeasible) => 1,
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
