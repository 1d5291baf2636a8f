use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BenchmarkRecord;
use crate::encoders::EncoderKind;
use crate::models::ModelKind;

/// The encoder every other encoder is compared against.
pub const BASELINE: EncoderKind = EncoderKind::Ordinal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub model: ModelKind,
    pub encoder: EncoderKind,
    /// Repetitions that trained successfully.
    pub runs: usize,
    pub failed: usize,
    /// Successful repetitions with a defined F1.
    pub defined: usize,
    pub f1_mean: Option<f64>,
    pub f1_std: Option<f64>,
    pub micro_f1_mean: Option<f64>,
    pub bce_mean: Option<f64>,
    pub bce_std: Option<f64>,
    pub train_seconds_mean: Option<f64>,
    /// Mean F1 strictly above the baseline's on the same dataset and model.
    pub better_than_baseline: bool,
}

impl SummaryRow {
    /// Every successful repetition had an undefined F1.
    pub fn undefined(&self) -> bool {
        self.runs > 0 && self.defined == 0
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// One row per (dataset, model, encoder). When a cell was recorded more than
/// once the last record wins.
pub fn summarize(records: &[BenchmarkRecord]) -> Vec<SummaryRow> {
    let mut latest = BTreeMap::new();
    for r in records {
        latest.insert(r.key(), r);
    }
    let mut cells: BTreeMap<(String, ModelKind, EncoderKind), Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in latest.into_values() {
        cells.entry((r.dataset.clone(), r.model, r.encoder)).or_default().push(r);
    }
    let mut rows: Vec<SummaryRow> = cells
        .into_iter()
        .map(|((dataset, model, encoder), recs)| {
            let ok: Vec<&&BenchmarkRecord> = recs.iter().filter(|r| !r.failed()).collect();
            let f1: Vec<f64> = ok.iter().filter_map(|r| r.f1).collect();
            let micro: Vec<f64> = ok.iter().filter_map(|r| r.micro_f1).collect();
            let bce: Vec<f64> = ok.iter().filter_map(|r| r.bce).collect();
            let secs: Vec<f64> = ok.iter().map(|r| r.train_seconds).collect();
            let f1s = mean_std(&f1);
            let bces = mean_std(&bce);
            SummaryRow {
                dataset,
                model,
                encoder,
                runs: ok.len(),
                failed: recs.len() - ok.len(),
                defined: f1.len(),
                f1_mean: f1s.map(|s| s.0),
                f1_std: f1s.map(|s| s.1),
                micro_f1_mean: mean_std(&micro).map(|s| s.0),
                bce_mean: bces.map(|s| s.0),
                bce_std: bces.map(|s| s.1),
                train_seconds_mean: mean_std(&secs).map(|s| s.0),
                better_than_baseline: false,
            }
        })
        .collect();
    let baselines: BTreeMap<(String, ModelKind), f64> = rows
        .iter()
        .filter(|r| r.encoder == BASELINE)
        .filter_map(|r| Some(((r.dataset.clone(), r.model), r.f1_mean?)))
        .collect();
    for row in &mut rows {
        if row.encoder != BASELINE {
            if let (Some(m), Some(&b)) = (row.f1_mean, baselines.get(&(row.dataset.clone(), row.model))) {
                row.better_than_baseline = m > b;
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(encoder: EncoderKind, rep: usize, f1: Option<f64>) -> BenchmarkRecord {
        BenchmarkRecord {
            dataset: "scale".into(),
            encoder,
            model: ModelKind::Entity,
            repetition: rep,
            seed: rep as u64,
            f1,
            micro_f1: f1,
            bce: Some(0.3),
            train_seconds: 2.0,
            error: None,
        }
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[0.9, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((m - 0.98).abs() < 1e-12);
        assert!((s - 0.04).abs() < 1e-12);
    }

    #[test]
    fn baseline_comparison_and_undefined_cells() {
        let mut recs = vec![];
        for rep in 0..5 {
            recs.push(rec(EncoderKind::Ordinal, rep, Some(0.54)));
            recs.push(rec(EncoderKind::Onehot, rep, Some(0.88)));
            recs.push(rec(EncoderKind::Target, rep, None));
        }
        let rows = summarize(&recs);
        let get = |k| rows.iter().find(|r| r.encoder == k).unwrap();
        assert!(get(EncoderKind::Onehot).better_than_baseline);
        assert!(!get(EncoderKind::Ordinal).better_than_baseline);
        let t = get(EncoderKind::Target);
        assert!(t.undefined() && t.f1_mean.is_none() && !t.better_than_baseline);
    }

    #[test]
    fn failures_are_excluded_and_duplicates_collapse() {
        let mut bad = rec(EncoderKind::Ordinal, 1, None);
        bad.error = Some("diverged".into());
        bad.bce = None;
        let recs = vec![rec(EncoderKind::Ordinal, 0, Some(0.5)), bad, rec(EncoderKind::Ordinal, 0, Some(0.7))];
        let row = &summarize(&recs)[0];
        assert_eq!((row.runs, row.failed, row.defined), (1, 1, 1));
        assert_eq!(row.f1_mean, Some(0.7));
    }

    #[test]
    fn summary_ignores_record_order() {
        let recs: Vec<_> = (0..4).map(|i| rec(EncoderKind::Onehot, i, Some(i as f64 / 4.0))).collect();
        let mut rev = recs.clone();
        rev.reverse();
        assert_eq!(summarize(&recs), summarize(&rev));
    }
}
