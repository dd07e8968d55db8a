use std::path::PathBuf;

/// Errors produced anywhere in the benchmark engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration diverged at step {step}: non-finite state")]
    Divergence { step: usize },

    #[error("matrix shape mismatch for {name}: expected [{expected_rows}, {expected_cols}], found [{rows}, {cols}]")]
    ShapeMismatch {
        name: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix contains non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("malformed matrix file {path}: {reason}")]
    MalformedMatrix { path: PathBuf, reason: String },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("manifest validation failed: {0}")]
    InvalidManifest(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),

    #[error("unsupported dataset {0:?}: only ODE_Lorenz and PDE_KS can be regenerated")]
    UnsupportedDataset(String),

    #[error("cannot aggregate runs: {0}")]
    Aggregation(String),

    #[error("chart error: {0}")]
    Chart(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| {
            let path = path.into();
            if source.kind() == std::io::ErrorKind::NotFound {
                Error::MissingFile(path)
            } else {
                Error::Io { path, source }
            }
        })
    }
}
