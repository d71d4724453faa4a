use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] airgan_core::Error),

    /// Every requested training run failed numerically.
    #[error("all {0} training runs failed")]
    AllRunsFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::AllRunsFailed(_) => 3,
            _ => 2,
        }
    }
}
