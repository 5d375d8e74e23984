use thiserror::Error;

/// Errors raised by the risk library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A loss specification cannot be evaluated as given.
    #[error("invalid loss configuration: {0}")]
    Config(String),

    /// Non-finite input or a numerical routine that failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The evidence p(y) of an outcome record is too small to normalize.
    #[error("degenerate evidence: p(y) = {evidence:e} for outcomes {outcomes:?}")]
    DegenerateEvidence { evidence: f64, outcomes: Vec<usize> },

    /// Exhaustive outcome enumeration would exceed 2^16 records.
    #[error(
        "exact enumeration needs 2^({m}*{measurements}) outcome records (limit 2^16); \
         use the Monte Carlo estimator instead"
    )]
    EnumerationBound { m: u32, measurements: usize },

    #[error("malformed state file: {0}")]
    StateFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
