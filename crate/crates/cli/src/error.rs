use thiserror::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] bloch1d::Error),

    #[error("output: {0}")]
    Io(#[from] std::io::Error),

    #[error("output: {0}")]
    Csv(#[from] csv::Error),

    #[error("output: {0}")]
    Json(#[from] serde_json::Error),

    /// The dataset was written but some points failed.
    #[error("{failed} of {total} rows failed")]
    PartialFailure { failed: usize, total: usize },
}

impl CliError {
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) => Some(e),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_CONFIG,
            CliError::Core(e) if e.is_config() => EXIT_CONFIG,
            CliError::Core(_) | CliError::PartialFailure { .. } => EXIT_NUMERICAL,
        }
    }
}
