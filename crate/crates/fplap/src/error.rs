use std::path::PathBuf;

/// Errors raised while loading inputs, running a command or writing outputs.
#[derive(Debug, thiserror::Error)]
pub enum FplapError {
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] fplap_core::Error),
}

impl FplapError {
    /// Process exit status: `1` for failures of the computation itself, `2`
    /// for invalid input and unmet preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            FplapError::Core(fplap_core::Error::EndpointNotFound { .. } | fplap_core::Error::Degenerate(_)) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FplapError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, FplapError>;
