use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema or syntax problem in a scenario file.
    #[error("{file}:{line}: {message}")]
    Config { file: String, line: usize, message: String },

    /// Valid syntax, but the scenario cannot be set up (bad region, missing oracle, ...).
    #[error("scenario `{scenario}`: {message}")]
    Scenario { scenario: String, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Solver { scenario: String, source: paralab::Error },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for the error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Scenario { .. } => 2,
            CliError::Solver { .. } => 3,
            CliError::Io(_) => 4,
        }
    }
}
