use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The simplex hit its iteration cap. Carries the last primal iterate.
    #[error("numerical failure after {iterations} iterations: {reason}")]
    Numerical {
        reason: String,
        iterations: usize,
        best_iterate: Vec<f64>,
    },

    /// A test-count search could not reach its target inside the allowed range.
    #[error("target error rate {target} not reached at M = {m_hi} (smoothed rate {reached})")]
    TargetUnreachable {
        target: f64,
        m_hi: usize,
        reached: f64,
        curve: Vec<(usize, f64)>,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
