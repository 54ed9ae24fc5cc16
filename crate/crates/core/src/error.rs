use alloc::string::String;

/// Errors raised by mesh construction, kernel assembly, the problem model and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("mesh validation failed: {0}")]
    MeshValidation(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("size mismatch: expected {expected} values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    /// A custom nonlinearity was evaluated outside its tabulated range.
    #[error("nonlinearity evaluated outside its domain at t = {t} (table covers [{lo}, {hi}])")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no negative-energy endpoint found along the ray up to t = {t_max}")]
    EndpointNotFound { t_max: f64 },

    #[error("all trials were degenerate: {0}")]
    Degenerate(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, actual })
    }
}
