use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("solver failed at t = {time:.6e} after {iterations} iterations (residual {residual:.3e})")]
    SolverFailure {
        time: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
