use std::io;

use thiserror::Error;

/// Errors raised by procedures, numerics, and the file layer.
#[derive(Debug, Error)]
pub enum ReplError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The dataset cannot support the requested analysis (missing follow-up
    /// values, inconsistent overrides, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A dependence modification was requested outside the regime where it is
    /// valid.
    #[error("applicability error: {0}")]
    Applicability(String),

    #[error("capacity error: requested k = {requested} exceeds cache maximum {max}")]
    Capacity { requested: usize, max: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("simulation repetition {rep}: {source}")]
    Repetition {
        rep: usize,
        #[source]
        source: Box<ReplError>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ReplError {
    /// Process exit code for this error class.
    ///
    /// 1 usage/config, 2 data, 3 applicability, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReplError::Domain(_) | ReplError::Config(_) => 1,
            ReplError::Data(_)
            | ReplError::Capacity { .. }
            | ReplError::Parse { .. }
            | ReplError::Format(_) => 2,
            ReplError::Applicability(_) => 3,
            ReplError::Io(_) => 4,
            ReplError::Repetition { source, .. } => source.exit_code(),
        }
    }
}

impl From<csv::Error> for ReplError {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(e) => ReplError::Io(e),
            kind => ReplError::Parse {
                line,
                msg: format!("{kind:?}"),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, ReplError>;
