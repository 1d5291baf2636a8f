//! The experiment grid: datasets x encoders x models x repetitions. Each
//! dataset is split and discretized once; each encoder is fitted once on
//! the training split; repetitions differ only in the model seed. Records
//! are appended as cells finish, so an interrupted run resumes where it
//! stopped.

mod records;
mod report;
mod summary;

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use tabenc_nn::mix_seed;

pub use records::{read_records, BenchmarkRecord, CellKey, RecordWriter};
pub use report::{cell_text, render_tables, write_report, Metric};
pub use summary::{mean_std, summarize, SummaryRow, BASELINE};

use crate::dataset::{dataset_names, load_dataset, split, DataTable, FetchOptions, Split, SplitSpec};
use crate::discretizer::{DiscretizerConfig, FittedDiscretizer};
use crate::encoders::{EncodedTable, EncoderKind, EncoderSpec, TableEncoder};
use crate::error::{Error, IoContext, Result};
use crate::models::{train, ModelConfig, ModelKind};

/// Worker-count override for the grid.
pub const WORKERS_ENV: &str = "TABENC_WORKERS";

pub const DEFAULT_ENCODERS: [EncoderKind; 6] = [
    EncoderKind::Ordinal,
    EncoderKind::Onehot,
    EncoderKind::Rarelabel,
    EncoderKind::StringSimilarity,
    EncoderKind::Summary,
    EncoderKind::Target,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub datasets: Vec<String>,
    pub encoders: Vec<EncoderKind>,
    pub models: Vec<ModelKind>,
    pub repetitions: usize,
    /// Master seed; repetition seeds derive from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub split: SplitSpec,
    pub discretizer: DiscretizerConfig,
    /// Encoder parameters shared by every kind; `kind` is ignored.
    pub encoder: EncoderSpec,
    /// Overrides the per-model default of 10 epochs.
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    /// Defaults to `TABENC_WORKERS`, then the number of CPUs.
    pub workers: Option<usize>,
    /// Dataset cache; defaults to `TABENC_CACHE_DIR` or `~/.cache/tabenc`.
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: dataset_names(),
            encoders: DEFAULT_ENCODERS.to_vec(),
            models: ModelKind::ALL.to_vec(),
            repetitions: 5,
            seed: 0,
            output_dir: PathBuf::from("results"),
            split: SplitSpec::default(),
            discretizer: DiscretizerConfig::default(),
            encoder: EncoderSpec::default(),
            epochs: None,
            learning_rate: None,
            workers: None,
            cache_dir: None,
            offline: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.normalize();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path).at(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    /// Puts the baseline encoder first and drops duplicates.
    pub fn normalize(&mut self) {
        let mut seen = HashSet::new();
        let mut encoders = vec![BASELINE];
        encoders.extend(self.encoders.iter().copied());
        encoders.retain(|e| seen.insert(*e));
        self.encoders = encoders;
        let mut seen = HashSet::new();
        self.models.retain(|m| seen.insert(*m));
        let mut seen = HashSet::new();
        self.datasets.retain(|d| seen.insert(d.clone()));
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.encoder.validate()?;
        if self.repetitions == 0 || self.models.is_empty() || self.datasets.is_empty() {
            return Err(Error::Config("need at least one dataset, model and repetition".into()));
        }
        if self.epochs == Some(0) || self.workers == Some(0) {
            return Err(Error::Config("epochs and workers must be positive".into()));
        }
        Ok(())
    }

    pub fn model_config(&self, kind: ModelKind) -> ModelConfig {
        let mut c = ModelConfig::for_kind(kind);
        if let Some(e) = self.epochs {
            c.epochs = e;
        }
        if let Some(lr) = self.learning_rate {
            c.learning_rate = lr;
        }
        c
    }

    pub fn encoder_spec(&self, kind: EncoderKind) -> EncoderSpec {
        EncoderSpec {
            kind,
            ..self.encoder.clone()
        }
    }

    pub fn fetch_options(&self) -> FetchOptions {
        let mut o = FetchOptions::from_env();
        if let Some(dir) = &self.cache_dir {
            o.cache_dir = dir.clone();
        }
        o.offline |= self.offline;
        o
    }

    fn workers(&self) -> usize {
        self.workers
            .or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok())
            .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
            .unwrap_or(1)
            .max(1)
    }

    /// Every cell in canonical order: dataset, encoder, model, repetition.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for d in &self.datasets {
            for &e in &self.encoders {
                for &m in &self.models {
                    for r in 0..self.repetitions {
                        out.push((d.clone(), e, m, r));
                    }
                }
            }
        }
        out
    }
}

/// Model seed of repetition `rep`.
pub fn repetition_seed(master: u64, rep: usize) -> u64 {
    mix_seed(master, rep as u64)
}

/// A dataset after splitting and discretization with bins fitted on the
/// training part.
#[derive(Clone, Debug)]
pub struct PreparedDataset {
    pub name: String,
    pub split: Split,
    pub discretizer: FittedDiscretizer,
    pub train: DataTable,
    pub validation: DataTable,
    pub test: DataTable,
}

impl PreparedDataset {
    pub fn new(name: &str, table: &DataTable, split_spec: &SplitSpec, config: &DiscretizerConfig) -> Result<Self> {
        let split = split(table, split_spec)?;
        let discretizer = FittedDiscretizer::fit(&split.train, config)?;
        Ok(PreparedDataset {
            name: name.to_string(),
            train: discretizer.apply(&split.train)?,
            validation: discretizer.apply(&split.validation)?,
            test: discretizer.apply(&split.test)?,
            split,
            discretizer,
        })
    }

    /// `split.json`, `bins.json` and `discretizer.csv`.
    pub fn write_sidecars(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).at(dir)?;
        self.split.write_sidecar(&dir.join("split.json"))?;
        self.discretizer.write_bins_json(&dir.join("bins.json"))?;
        self.discretizer.write_diagnostics_csv(&dir.join("discretizer.csv"))
    }

    /// Fits `spec` on the training part and encodes all three parts.
    pub fn encode(&self, spec: &EncoderSpec) -> Result<(TableEncoder, [EncodedTable; 3])> {
        let enc = TableEncoder::fit(&self.train, spec)?;
        let parts = [
            enc.transform(&self.train)?,
            enc.transform(&self.validation)?,
            enc.transform(&self.test)?,
        ];
        Ok((enc, parts))
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

fn run_cell(config: &RunConfig, key: &CellKey, data: &[EncodedTable; 3]) -> BenchmarkRecord {
    let seed = repetition_seed(config.seed, key.3);
    let model_config = config.model_config(key.2);
    let outcome = catch_unwind(AssertUnwindSafe(|| train::<f32>(&model_config, &data[0], &data[1], &data[2], seed)));
    match outcome {
        Ok(Ok((_, report))) => BenchmarkRecord {
            dataset: key.0.clone(),
            encoder: key.1,
            model: key.2,
            repetition: key.3,
            seed,
            f1: report.test_f1,
            micro_f1: report.test_micro_f1,
            bce: Some(report.test_bce),
            train_seconds: report.train_seconds,
            error: None,
        },
        Ok(Err(e)) => BenchmarkRecord::failure(key, seed, e.to_string()),
        Err(p) => BenchmarkRecord::failure(key, seed, panic_message(p)),
    }
}

/// Runs `cells` on a worker pool and appends their records in the order
/// given, whatever order they finish in.
fn run_cells(
    config: &RunConfig,
    cells: &[CellKey],
    encoded: &BTreeMap<EncoderKind, std::result::Result<[EncodedTable; 3], String>>,
    writer: &mut RecordWriter,
) -> Result<Vec<BenchmarkRecord>> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut out = Vec::with_capacity(cells.len());
    std::thread::scope(|s| -> Result<()> {
        for _ in 0..config.workers().min(cells.len()) {
            let tx = tx.clone();
            let next = &next;
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(key) = cells.get(i) else { break };
                let record = match &encoded[&key.1] {
                    Ok(data) => run_cell(config, key, data),
                    Err(msg) => BenchmarkRecord::failure(key, repetition_seed(config.seed, key.3), msg.clone()),
                };
                if tx.send((i, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for (i, record) in rx {
            pending.insert(i, record);
            while let Some(r) = pending.remove(&out.len()) {
                log::info!(
                    "{} {} {} rep {}: f1 {:?} bce {:?}{}",
                    r.dataset,
                    r.encoder,
                    r.model,
                    r.repetition,
                    r.f1,
                    r.bce,
                    r.error.as_deref().map_or(String::new(), |e| format!(" FAILED: {e}"))
                );
                writer.append(&r)?;
                out.push(r);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Runs the grid with `load` supplying each dataset by name. Cells already
/// in `records.jsonl` are skipped. Returns every record of the run, old and
/// new, in file order.
pub fn run_with(config: &RunConfig, load: impl Fn(&str) -> Result<DataTable>) -> Result<Vec<BenchmarkRecord>> {
    let mut config = config.clone();
    config.normalize();
    config.validate()?;
    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir).at(out_dir)?;
    let config_path = out_dir.join("run_config.toml");
    std::fs::write(&config_path, config.to_toml()).at(&config_path)?;
    let records_path = out_dir.join("records.jsonl");
    let mut records = read_records(&records_path)?;
    let done: HashSet<CellKey> = records.iter().map(BenchmarkRecord::key).collect();
    let mut writer = RecordWriter::open(&records_path)?;
    let all = config.cells();
    for dataset in &config.datasets {
        let cells: Vec<CellKey> = all
            .iter()
            .filter(|k| &k.0 == dataset && !done.contains(*k))
            .cloned()
            .collect();
        if cells.is_empty() {
            continue;
        }
        log::info!("{dataset}: {} cells to run", cells.len());
        let prepared = load(dataset)
            .and_then(|t| PreparedDataset::new(dataset, &t, &config.split, &config.discretizer))
            .and_then(|p| {
                p.write_sidecars(&out_dir.join("datasets").join(dataset))?;
                Ok(p)
            });
        let prepared = match prepared {
            Ok(p) => p,
            Err(e) => {
                log::error!("{dataset}: {e}");
                for key in &cells {
                    let r = BenchmarkRecord::failure(key, repetition_seed(config.seed, key.3), e.to_string());
                    writer.append(&r)?;
                    records.push(r);
                }
                continue;
            }
        };
        let kinds: std::collections::BTreeSet<EncoderKind> = cells.iter().map(|k| k.1).collect();
        let encoded = kinds
            .into_iter()
            .map(|kind| {
                let r = prepared.encode(&config.encoder_spec(kind)).map(|p| p.1).map_err(|e| e.to_string());
                (kind, r)
            })
            .collect();
        records.extend(run_cells(&config, &cells, &encoded, &mut writer)?);
    }
    Ok(records)
}

/// Runs the grid on registry datasets fetched through the cache.
pub fn run(config: &RunConfig) -> Result<Vec<BenchmarkRecord>> {
    let opts = config.fetch_options();
    run_with(config, |name| load_dataset(name, &opts))
}

/// Summarizes `dir/records.jsonl` and writes the report files next to it.
pub fn report_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let records = read_records(&dir.join("records.jsonl"))?;
    write_report(&summarize(&records), dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_always_first() {
        let c = RunConfig::from_toml("datasets = [\"car\"]\nencoders = [\"onehot\", \"onehot\"]").unwrap();
        assert_eq!(c.encoders, [EncoderKind::Ordinal, EncoderKind::Onehot]);
    }

    #[test]
    fn grid_arithmetic() {
        let c = RunConfig {
            datasets: vec!["car".into()],
            encoders: vec![EncoderKind::Ordinal, EncoderKind::Onehot],
            models: vec![ModelKind::Entity],
            ..RunConfig::default()
        };
        assert_eq!(c.cells().len(), 10);
        let full = RunConfig::default();
        assert_eq!(full.cells().len() / full.repetitions, 120);
    }

    #[test]
    fn repetition_seeds_are_distinct_and_stable() {
        let seeds: HashSet<u64> = (0..100).map(|r| repetition_seed(7, r)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(repetition_seed(7, 3), repetition_seed(7, 3));
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }
}
