use thiserror::Error;

/// Failures raised by the library. Every variant names the operation that
/// produced it so callers can surface a useful message without extra context.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: insufficient data ({m} members, need at least {need})")]
    InsufficientData {
        op: &'static str,
        m: usize,
        need: usize,
    },

    #[error("{op}: degenerate variance in column {column} on the conditioning set")]
    DegenerateVariance { op: &'static str, column: usize },

    #[error("{op}: quantile set has zero probability")]
    EmptyCondition { op: &'static str },

    #[error("{op}: {redraws} redraws exceed 10% of {replicates} replicates")]
    ExcessiveRedraws {
        op: &'static str,
        redraws: usize,
        replicates: usize,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    /// Name of the operation that failed.
    pub fn op(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::InsufficientData { op, .. }
            | Error::DegenerateVariance { op, .. }
            | Error::EmptyCondition { op }
            | Error::ExcessiveRedraws { op, .. } => op,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
