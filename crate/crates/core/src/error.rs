use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("implicit solve residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    SolverFailure { residual: f64, tolerance: f64 },

    #[error("max u = {max_u:.3e} exceeded the blow-up ceiling {ceiling:.3e}")]
    BlowUp { max_u: f64, ceiling: f64 },

    #[error("run failed at t = {t}: {source}")]
    RunFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("trace is missing required data: {0}")]
    MissingData(String),

    #[error("threshold construction failed: {0}")]
    Thresholds(String),

    #[error("config: {0}")]
    Config(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether this error (or the error it wraps) is a blow-up signal.
    pub fn is_blowup(&self) -> bool {
        match self {
            Error::BlowUp { .. } => true,
            Error::RunFailed { source, .. } => source.is_blowup(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
