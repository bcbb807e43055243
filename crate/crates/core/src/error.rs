use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max |H - H†| = {violation:e})")]
    NotHermitian { violation: f64 },

    #[error("integration produced a non-finite state at step {step}")]
    Divergence { step: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no physical states: the constraint kernel is empty")]
    NoPhysicalStates,

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::Numerical(_) | Error::NoPhysicalStates => true,
            Error::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
