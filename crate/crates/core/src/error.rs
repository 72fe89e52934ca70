use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters supplied by the caller.
    Usage,
    /// Unreadable, malformed or insufficient input data.
    Data,
    /// Numerical failure during estimation.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV{}: {message}", path.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default())]
    Csv {
        path: Option<PathBuf>,
        message: String,
    },
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("duplicate row for entity `{entity}`, year {year}{}", variable.as_ref().map(|v| format!(", variable `{v}`")).unwrap_or_default())]
    DuplicateRow {
        entity: String,
        year: i32,
        variable: Option<String>,
    },
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("rank-deficient regressor matrix; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("degenerate after conditioning")]
    DegenerateAfterConditioning,
    #[error("residual covariance is not positive definite; retry with a diagonal ridge (e.g. 1e-8)")]
    NotPositiveDefinite,
    #[error("{failed} of {total} replicates failed (limit is 10%)")]
    TooManyFailures { failed: usize, total: usize },
    #[error("could not draw a stable coefficient matrix: {0}")]
    Unstable(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::MissingColumn(_)
            | Error::DuplicateRow { .. }
            | Error::InvalidPanel(_)
            | Error::InsufficientData(_) => ErrorKind::Data,
            Error::ZeroVariance(_)
            | Error::RankDeficient(_)
            | Error::DegenerateAfterConditioning
            | Error::NotPositiveDefinite
            | Error::TooManyFailures { .. }
            | Error::Unstable(_) => ErrorKind::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
