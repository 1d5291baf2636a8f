//! Supervised discretization of continuous columns: a single-feature CART
//! tree whose depth is picked by cross-validation, pruned by cost
//! complexity at the alpha with the best mean/std held-out accuracy. The
//! surviving thresholds become bin edges. One-dimensional k-means is
//! available as an unsupervised alternative.

mod bins;
mod cv;
mod kmeans;
mod prune;
mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use bins::{extract_bins, BinEdges};
pub use cv::{
    best_depth, depth_scores, pruning_path, select_alpha, stratified_folds, AlphaChoice, CvScore, PruningPath,
    STD_FLOOR,
};
pub use kmeans::{kmeans_bins, KMeansFit};
pub use prune::{prune_at, weakest_link_path, PrunedTree};
pub use tree::{entropy_bits, grow_tree, Tree, TreeNode};

use crate::dataset::{parse_number, ColumnSchema, DataTable, Role, MISSING_TOKEN};
use crate::error::{Error, IoContext, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscretizerConfig {
    /// Depths `1..=max_depth` are searched.
    pub max_depth: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for DiscretizerConfig {
    fn default() -> Self {
        DiscretizerConfig {
            max_depth: 7,
            folds: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnDiagnostics {
    pub column: String,
    pub depth_scores: Vec<Option<CvScore>>,
    pub depth: Option<usize>,
    pub path: Option<PruningPath>,
    pub choice: Option<AlphaChoice>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedDiscretizer {
    pub config: DiscretizerConfig,
    pub bins: Vec<BinEdges>,
    pub diagnostics: Vec<ColumnDiagnostics>,
}

/// Fits bin edges for one column; `None` cells are missing and ignored.
pub fn fit_column(
    column: &str,
    x: &[Option<f64>],
    y: &[usize],
    n_levels: usize,
    config: &DiscretizerConfig,
) -> Result<(BinEdges, ColumnDiagnostics)> {
    let (xs, ys): (Vec<f64>, Vec<usize>) = x.iter().zip(y).filter_map(|(v, &t)| v.map(|v| (v, t))).unzip();
    let mut diag = ColumnDiagnostics {
        column: column.to_string(),
        depth_scores: Vec::new(),
        depth: None,
        path: None,
        choice: None,
    };
    let usable = xs.len() >= 2 && ys.iter().any(|&v| v != ys[0]) && xs.iter().any(|&v| v != xs[0]);
    if !usable {
        log::warn!("column {column}: no usable split, kept as a single bin");
        return Ok((BinEdges::single(column), diag));
    }
    let folds = stratified_folds(&ys, config.folds, config.seed);
    diag.depth_scores = depth_scores(&xs, &ys, n_levels, config.max_depth, &folds, config.folds)?;
    let depth = best_depth(&diag.depth_scores).unwrap_or(1);
    diag.depth = Some(depth);
    let tree = grow_tree(&xs, &ys, n_levels, depth)?;
    if tree.n_decision_nodes() == 0 {
        return Ok((BinEdges::single(column), diag));
    }
    let path = pruning_path(&tree, &xs, &ys, &folds, config.folds)?;
    let choice = select_alpha(&path)?;
    if choice.fallback {
        log::warn!("column {column}: every scored alpha prunes to the root; using alpha {}", choice.alpha);
    }
    let bins = extract_bins(column, &prune_at(&tree, choice.alpha), choice.alpha);
    diag.path = Some(path);
    diag.choice = Some(choice);
    Ok((bins, diag))
}

fn numeric_cells(cells: &[String]) -> Result<Vec<Option<f64>>> {
    cells
        .iter()
        .enumerate()
        .map(|(row, c)| {
            if c == MISSING_TOKEN {
                Ok(None)
            } else {
                parse_number(c).map(Some).ok_or_else(|| Error::Parse {
                    row,
                    message: format!("non-numeric cell {c:?} in a continuous column"),
                })
            }
        })
        .collect()
}

impl FittedDiscretizer {
    /// Fits every continuous column of `table` against its target; columns
    /// are processed concurrently and collected in schema order.
    pub fn fit(table: &DataTable, config: &DiscretizerConfig) -> Result<Self> {
        let y = table.target_codes();
        let n_levels = table.target_levels().len();
        let continuous: Vec<usize> = (0..table.n_cols())
            .filter(|&i| table.schema()[i].role == Role::Continuous)
            .collect();
        let results: Vec<Result<(BinEdges, ColumnDiagnostics)>> = std::thread::scope(|s| {
            let handles: Vec<_> = continuous
                .iter()
                .map(|&i| {
                    let y = &y;
                    s.spawn(move || {
                        let name = &table.schema()[i].name;
                        fit_column(name, &numeric_cells(&table.columns()[i])?, y, n_levels, config)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("discretizer worker panicked")).collect()
        });
        let mut fitted = FittedDiscretizer {
            config: config.clone(),
            bins: Vec::new(),
            diagnostics: Vec::new(),
        };
        for r in results {
            let (b, d) = r?;
            fitted.bins.push(b);
            fitted.diagnostics.push(d);
        }
        Ok(fitted)
    }

    /// Replaces each fitted continuous column by its bin labels. Missing
    /// cells stay missing and become their own level.
    pub fn apply(&self, table: &DataTable) -> Result<DataTable> {
        let mut out = table.clone();
        for bins in &self.bins {
            let idx = table
                .column_index(&bins.column)
                .ok_or_else(|| Error::Config(format!("column {} not in table", bins.column)))?;
            let cells: Vec<String> = numeric_cells(&table.columns()[idx])?
                .into_iter()
                .map(|v| v.map_or_else(|| MISSING_TOKEN.to_string(), |v| bins.label(bins.bin_index(v))))
                .collect();
            let mut levels = bins.labels();
            if cells.iter().any(|c| c == MISSING_TOKEN) {
                levels.push(MISSING_TOKEN.to_string());
                levels.sort();
            }
            let schema = ColumnSchema {
                name: bins.column.clone(),
                role: Role::Categorical,
                levels,
                missing_token: MISSING_TOKEN.to_string(),
            };
            out.replace_column(idx, schema, cells);
        }
        Ok(out)
    }

    pub fn write_bins_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.bins)?).at(path)
    }

    /// One row per (column, alpha): leaves and CV accuracy, for plotting
    /// accuracy against tree size.
    pub fn write_diagnostics_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["column", "depth", "alpha", "leaves", "cv_mean", "cv_std", "selected"])?;
        for d in &self.diagnostics {
            let Some(p) = &d.path else { continue };
            for i in 0..p.alphas.len() {
                let (mean, std) = p.cv_scores[i].map_or((String::new(), String::new()), |s| {
                    (s.mean.to_string(), s.std.to_string())
                });
                w.write_record([
                    d.column.clone(),
                    d.depth.map_or(String::new(), |v| v.to_string()),
                    p.alphas[i].to_string(),
                    p.subtree_sizes[i].to_string(),
                    mean,
                    std,
                    d.choice.is_some_and(|c| c.index == i).to_string(),
                ])?;
            }
        }
        w.flush().at(path)
    }
}

/// Fits on `table` and applies to it.
pub fn discretize_table(table: &DataTable, config: &DiscretizerConfig) -> Result<(DataTable, Vec<BinEdges>)> {
    let fitted = FittedDiscretizer::fit(table, config)?;
    Ok((fitted.apply(table)?, fitted.bins))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize) -> DataTable {
        // three classes on [0, 10), [20, 30), [40, 50)
        let v: Vec<f64> = (0..n).map(|i| (i * 37 % n) as f64 * 30.0 / n as f64).collect();
        let x: Vec<String> = v.iter().map(|&v| (v + 10.0 * (v / 10.0).floor()).to_string()).collect();
        let y: Vec<String> = v.iter().map(|&v| ["a", "b", "c"][(v / 10.0) as usize].to_string()).collect();
        let cat: Vec<String> = (0..n).map(|i| format!("k{}", i % 3)).collect();
        DataTable::new(vec!["x".into(), "cat".into(), "y".into()], vec![x, cat, y], "y").unwrap()
    }

    #[test]
    fn no_continuous_columns_is_identity() {
        let t = DataTable::new(
            vec!["a".into(), "y".into()],
            vec![vec!["p".into(), "q".into()], vec!["0".into(), "1".into()]],
            "y",
        )
        .unwrap();
        let (out, bins) = discretize_table(&t, &DiscretizerConfig::default()).unwrap();
        assert_eq!(out, t);
        assert!(bins.is_empty());
    }

    #[test]
    fn separable_column_recovers_class_boundaries() {
        let t = synthetic(400);
        let (out, bins) = discretize_table(&t, &DiscretizerConfig::default()).unwrap();
        assert_eq!(bins.len(), 1);
        let e = &bins[0].edges;
        assert_eq!(e.len(), 2, "{e:?}");
        assert!(e[0] > 9.9 && e[0] < 20.0 && e[1] > 29.9 && e[1] < 40.0, "{e:?}");
        assert_eq!(out.schema()[0].role, Role::Categorical);
        assert!(out.schema()[0].levels.iter().all(|l| l.starts_with("bin_")));
    }

    #[test]
    fn zero_variance_subtree_can_beat_a_more_accurate_one() {
        let path = PruningPath {
            alphas: vec![0.0, 0.25],
            subtree_sizes: vec![3, 2],
            cv_scores: vec![
                Some(CvScore { mean: 0.9975, std: 0.005, folds: 5 }),
                Some(CvScore { mean: 0.75, std: 0.0, folds: 5 }),
            ],
        };
        assert_eq!(select_alpha(&path).unwrap().index, 1);
    }

    #[test]
    fn refit_is_bit_identical() {
        let t = synthetic(300);
        let a = FittedDiscretizer::fit(&t, &DiscretizerConfig::default()).unwrap();
        let b = FittedDiscretizer::fit(&t, &DiscretizerConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_cells_survive_as_their_own_level() {
        let mut x: Vec<String> = (0..60).map(|i| i.to_string()).collect();
        x[5] = MISSING_TOKEN.into();
        let y: Vec<String> = (0..60).map(|i| if i < 30 { "n" } else { "p" }.to_string()).collect();
        let t = DataTable::new(vec!["x".into(), "y".into()], vec![x, y], "y").unwrap();
        let (out, _) = discretize_table(&t, &DiscretizerConfig::default()).unwrap();
        assert_eq!(out.columns()[0][5], MISSING_TOKEN);
        assert!(out.schema()[0].levels.contains(&MISSING_TOKEN.to_string()));
    }

    #[test]
    fn noise_column_with_constant_target_is_single_bin() {
        let (bins, _) = fit_column(
            "x",
            &(0..20).map(|i| Some(i as f64)).collect::<Vec<_>>(),
            &[0; 20],
            2,
            &DiscretizerConfig::default(),
        )
        .unwrap();
        assert!(bins.degenerate);
        assert_eq!(bins.n_bins(), 1);
    }
}
