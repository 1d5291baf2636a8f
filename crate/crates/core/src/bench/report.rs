use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use super::summary::{SummaryRow, BASELINE};
use crate::encoders::EncoderKind;
use crate::error::{IoContext, Result};
use crate::models::ModelKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    F1,
    Bce,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::Bce => "bce",
        }
    }

    fn stats(self, r: &SummaryRow) -> Option<(f64, f64)> {
        match self {
            Metric::F1 => Some((r.f1_mean?, r.f1_std?)),
            Metric::Bce => Some((r.bce_mean?, r.bce_std?)),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

/// Text of one table cell: `mean (std)`, `undefined`, `failed` or empty.
pub fn cell_text(row: Option<&SummaryRow>, metric: Metric) -> String {
    let Some(r) = row else { return String::new() };
    if r.runs == 0 {
        return if r.failed > 0 { "failed".into() } else { String::new() };
    }
    if metric == Metric::F1 && r.undefined() {
        return "undefined".into();
    }
    match metric.stats(r) {
        Some((m, s)) => {
            let mark = if metric == Metric::F1 && r.better_than_baseline { "*" } else { "" };
            format!("{m:.2} ({s:.2}){mark}")
        }
        None => String::new(),
    }
}

fn axes(rows: &[SummaryRow]) -> (Vec<String>, Vec<ModelKind>, Vec<EncoderKind>) {
    let datasets: BTreeSet<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    let models: BTreeSet<ModelKind> = rows.iter().map(|r| r.model).collect();
    let mut encoders: Vec<EncoderKind> = rows.iter().map(|r| r.encoder).collect::<BTreeSet<_>>().into_iter().collect();
    // baseline first
    encoders.sort_by_key(|&e| (e != BASELINE, e));
    (
        datasets.into_iter().map(str::to_string).collect(),
        models.into_iter().collect(),
        encoders,
    )
}

fn find<'a>(rows: &'a [SummaryRow], d: &str, m: ModelKind, e: EncoderKind) -> Option<&'a SummaryRow> {
    rows.iter().find(|r| r.dataset == d && r.model == m && r.encoder == e)
}

fn write_long(rows: &[SummaryRow], metric: Metric, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "dataset",
        "model",
        "encoder",
        "mean",
        "std",
        "runs",
        "failed",
        "defined",
        "undefined",
        "better_than_baseline",
        "micro_f1_mean",
    ])?;
    for r in rows {
        let s = metric.stats(r);
        w.write_record([
            r.dataset.clone(),
            r.model.to_string(),
            r.encoder.to_string(),
            opt(s.map(|s| s.0)),
            opt(s.map(|s| s.1)),
            r.runs.to_string(),
            r.failed.to_string(),
            r.defined.to_string(),
            (metric == Metric::F1 && r.undefined()).to_string(),
            (metric == Metric::F1 && r.better_than_baseline).to_string(),
            if metric == Metric::F1 { opt(r.micro_f1_mean) } else { String::new() },
        ])?;
    }
    w.flush().at(path)
}

fn write_wide(rows: &[SummaryRow], metric: Metric, model: ModelKind, path: &Path) -> Result<()> {
    let (datasets, _, encoders) = axes(rows);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["dataset".to_string()];
    header.extend(encoders.iter().map(|e| e.to_string()));
    w.write_record(&header)?;
    for d in &datasets {
        let mut rec = vec![d.clone()];
        rec.extend(encoders.iter().map(|&e| cell_text(find(rows, d, model, e), metric)));
        w.write_record(&rec)?;
    }
    w.flush().at(path)
}

fn write_timings(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["dataset", "model", "encoder", "train_seconds_mean", "runs"])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.model.to_string(),
            r.encoder.to_string(),
            opt(r.train_seconds_mean),
            r.runs.to_string(),
        ])?;
    }
    w.flush().at(path)
}

fn text_table(title: &str, header: &[String], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = format!("{title}\n{}\n", line(header));
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
    out.push('\n');
    for row in body {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Formatted tables for every (metric, model) plus the ordinal versus
/// string-similarity training-time comparison.
pub fn render_tables(rows: &[SummaryRow]) -> String {
    let (datasets, models, encoders) = axes(rows);
    let mut out = String::new();
    let mut header = vec!["dataset".to_string()];
    header.extend(encoders.iter().map(|e| e.to_string()));
    for metric in [Metric::F1, Metric::Bce] {
        for &model in &models {
            let body: Vec<Vec<String>> = datasets
                .iter()
                .map(|d| {
                    let mut r = vec![d.clone()];
                    r.extend(encoders.iter().map(|&e| cell_text(find(rows, d, model, e), metric)));
                    r
                })
                .collect();
            let title = format!("{} / {model}: mean (std) over repetitions", metric.name().to_uppercase());
            out.push_str(&text_table(&title, &header, &body));
            out.push('\n');
        }
    }
    out.push_str("* mean F1 above the ordinal baseline\n\n");
    for &model in &models {
        let body: Vec<Vec<String>> = datasets
            .iter()
            .map(|d| {
                let mut r = vec![d.clone()];
                r.extend(encoders.iter().map(|&e| {
                    find(rows, d, model, e)
                        .and_then(|r| r.train_seconds_mean)
                        .map_or(String::new(), |s| format!("{s:.3}"))
                }));
                r
            })
            .collect();
        let mut h = vec!["dataset".to_string()];
        h.extend(encoders.iter().map(|e| format!("{e} (s)")));
        out.push_str(&text_table(&format!("Training time / {model}"), &h, &body));
        out.push('\n');
    }
    out
}

/// Writes `summary_f1.csv`, `summary_bce.csv`, `<metric>_<model>.csv`,
/// `timings.csv` and `tables.txt` into `dir`; returns the written paths.
pub fn write_report(rows: &[SummaryRow], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).at(dir)?;
    let mut written = Vec::new();
    for metric in [Metric::F1, Metric::Bce] {
        let p = dir.join(format!("summary_{}.csv", metric.name()));
        write_long(rows, metric, &p)?;
        written.push(p);
        for model in axes(rows).1 {
            let p = dir.join(format!("{}_{model}.csv", metric.name()));
            write_wide(rows, metric, model, &p)?;
            written.push(p);
        }
    }
    let p = dir.join("timings.csv");
    write_timings(rows, &p)?;
    written.push(p);
    let p = dir.join("tables.txt");
    std::fs::write(&p, render_tables(rows)).at(&p)?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(encoder: EncoderKind, f1: Option<f64>, better: bool) -> SummaryRow {
        SummaryRow {
            dataset: "scale".into(),
            model: ModelKind::Entity,
            encoder,
            runs: 5,
            failed: 0,
            defined: if f1.is_some() { 5 } else { 0 },
            f1_mean: f1,
            f1_std: f1.map(|_| 0.01),
            micro_f1_mean: f1,
            bce_mean: Some(0.2),
            bce_std: Some(0.0),
            train_seconds_mean: Some(1.5),
            better_than_baseline: better,
        }
    }

    #[test]
    fn cells_render_flags() {
        assert_eq!(cell_text(Some(&row(EncoderKind::Onehot, Some(0.88), true)), Metric::F1), "0.88 (0.01)*");
        assert_eq!(cell_text(Some(&row(EncoderKind::Target, None, false)), Metric::F1), "undefined");
        let mut failed = row(EncoderKind::Basen, None, false);
        failed.runs = 0;
        failed.failed = 5;
        assert_eq!(cell_text(Some(&failed), Metric::F1), "failed");
        assert_eq!(cell_text(None, Metric::Bce), "");
    }

    #[test]
    fn report_files() {
        let rows = vec![
            row(EncoderKind::Ordinal, Some(0.54), false),
            row(EncoderKind::StringSimilarity, Some(0.88), true),
        ];
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&rows, dir.path()).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into()).collect();
        assert_eq!(
            names,
            ["summary_f1.csv", "f1_entity.csv", "summary_bce.csv", "bce_entity.csv", "timings.csv", "tables.txt"]
        );
        let text = std::fs::read_to_string(dir.path().join("tables.txt")).unwrap();
        assert!(text.contains("0.88 (0.01)*"));
        assert!(text.contains("Training time / entity"));
        let wide = std::fs::read_to_string(dir.path().join("f1_entity.csv")).unwrap();
        assert!(wide.starts_with("dataset,ordinal,string_similarity\n"));
    }
}
