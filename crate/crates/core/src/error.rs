use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CpdError> = std::result::Result<T, E>;

/// Errors raised by the library.
///
/// The CLI maps [`CpdError::Degenerate`] to exit code 3 and every
/// validation-style variant to exit code 2.
#[derive(Debug, Error)]
pub enum CpdError {
    /// Objects of different spaces or shapes were combined.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed object content (non-monotone quantiles, asymmetric matrices, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A caller-supplied argument or configuration value is out of range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A structural requirement of an operation is not met (e.g. too few objects).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The sequence has (numerically) zero variance-of-variance; the scan
    /// function is undefined.
    #[error("degenerate sequence: {0}")]
    Degenerate(String),

    /// A simulation run failed; carries the seed needed to reproduce it.
    #[error("study run failed (param={param}, run={run}, seed={seed}): {source}")]
    StudyRun {
        param: f64,
        run: usize,
        seed: u64,
        #[source]
        source: Box<CpdError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CpdError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Self::Format(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Self::Dimension(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Self::Precondition(msg.into())
    }

    /// True when the root cause is a degenerate sequence.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Self::Degenerate(_) => true,
            Self::StudyRun { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }
}
