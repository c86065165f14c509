use alloc::string::String;

/// Errors raised by the estimation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range [{min}, {max}]")]
    OutOfRange { index: usize, min: usize, max: usize },
    #[error("simulation diverged at step {index} (x = {value})")]
    SimulationDiverged { index: usize, value: f64 },
    #[error("drift evaluated to a non-finite value at x = {x}")]
    NonFiniteDrift { x: f64 },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
