use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoders::EncoderKind;
use crate::error::{IoContext, Result};
use crate::models::ModelKind;

/// One trained cell of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub dataset: String,
    pub encoder: EncoderKind,
    pub model: ModelKind,
    pub repetition: usize,
    pub seed: u64,
    /// Macro F1 for multi-class tasks; `None` when undefined or failed.
    pub f1: Option<f64>,
    pub micro_f1: Option<f64>,
    /// `None` only for failed cells.
    pub bce: Option<f64>,
    pub train_seconds: f64,
    /// Set when the cell failed.
    pub error: Option<String>,
}

pub type CellKey = (String, EncoderKind, ModelKind, usize);

impl BenchmarkRecord {
    pub fn key(&self) -> CellKey {
        (self.dataset.clone(), self.encoder, self.model, self.repetition)
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn failure(key: &CellKey, seed: u64, error: String) -> Self {
        BenchmarkRecord {
            dataset: key.0.clone(),
            encoder: key.1,
            model: key.2,
            repetition: key.3,
            seed,
            f1: None,
            micro_f1: None,
            bce: None,
            train_seconds: 0.0,
            error: Some(error),
        }
    }
}

/// Records of a JSON-lines file; a missing file is empty and an
/// unparsable last line (an interrupted write) is dropped.
pub fn read_records(path: &Path) -> Result<Vec<BenchmarkRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let lines: Vec<String> = BufReader::new(File::open(path).at(path)?)
        .lines()
        .collect::<std::io::Result<_>>()
        .at(path)?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(e) if i + 1 == lines.len() => log::warn!("{}: dropping truncated last record: {e}", path.display()),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Append-only JSON-lines writer, flushed after every record.
pub struct RecordWriter {
    path: PathBuf,
    file: File,
}

impl RecordWriter {
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path).at(path)?;
        Ok(RecordWriter {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn append(&mut self, record: &BenchmarkRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.file, "{line}").at(&self.path)?;
        self.file.flush().at(&self.path)
    }
}
