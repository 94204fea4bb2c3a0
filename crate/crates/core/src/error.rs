use thiserror::Error;

use crate::trace::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite coordinate {value} at position {position}")]
    NonFinitePoint { position: usize, value: f64 },

    #[error("objective returned non-finite value {value} for component {component}")]
    NonFiniteValue { component: usize, value: f64 },

    #[error("non-finite iterate after step {step}")]
    NonFiniteIterate { step: u64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("anchor cache is stale: the epoch it was built for has ended")]
    StaleCache,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid problem: {0}")]
    Construction(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A run that failed part-way; carries everything recorded up to the last good iterate.
    #[error("run aborted: {source}")]
    Aborted { source: Box<Error>, trace: Box<Trace> },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for failures caused by the objective or the iterate (as opposed to bad inputs).
    pub fn is_objective_failure(&self) -> bool {
        match self {
            Error::NonFiniteValue { .. } | Error::NonFiniteIterate { .. } | Error::NonFinitePoint { .. } => true,
            Error::Aborted { source, .. } => source.is_objective_failure(),
            _ => false,
        }
    }

    pub fn is_parse_failure(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_) | Error::Construction(_))
    }
}
