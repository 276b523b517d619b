use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no {0} scatterers available to fit a visibility region")]
    NoScatterers(&'static str),

    #[error("scatterer at {0:?} coincides with a transceiver")]
    DegenerateScatterer([f64; 3]),

    #[error("channel has no propagation paths")]
    NoPaths,

    #[error("frequency {0} Hz is not positive")]
    Frequency(f64),

    #[error("PDP grids differ: {0}")]
    GridMismatch(String),

    #[error("accuracy undefined: ground truth sums to zero")]
    EmptyTruth,

    #[error("sequences are not aligned: {0} vs {1}")]
    Misaligned(usize, usize),

    #[error("data error: {0}")]
    Data(String),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad user-supplied configuration rather than data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
