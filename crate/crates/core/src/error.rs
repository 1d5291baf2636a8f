use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error at data row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unknown dataset {0:?}")]
    Registry(String),
    #[error("fetch failed for {dataset}: {message}")]
    Fetch { dataset: String, message: String },
    #[error("checksum mismatch for {path}: expected {expected}, got {actual}")]
    Integrity {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("training diverged (seed {seed}, epoch {epoch}, batch {batch}): loss is {loss}")]
    Diverged {
        seed: u64,
        epoch: usize,
        batch: usize,
        loss: f64,
    },
    #[error(transparent)]
    Nn(#[from] tabenc_nn::NnError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}
