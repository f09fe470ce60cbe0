use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{op}: {msg}")]
    Data { op: &'static str, msg: String },

    #[error(transparent)]
    Domain(#[from] qcorr::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn data(op: &'static str, msg: impl Into<String>) -> Self {
        CliError::Data {
            op,
            msg: msg.into(),
        }
    }

    /// 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
