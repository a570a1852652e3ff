use lqm_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}; reduce the sweep size or raise the limit with --max-entries")]
    Capacity(CoreError),

    #[error(transparent)]
    Core(CoreError),

    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Capacity { .. } => LabError::Capacity(e),
            other => LabError::Core(other),
        }
    }
}

impl LabError {
    /// Process exit status: 2 for config errors, 3 for capacity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Capacity(_) => 3,
            LabError::Core(_) | LabError::Io(_) => 1,
        }
    }
}
