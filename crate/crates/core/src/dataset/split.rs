use std::path::Path;

use serde::{Deserialize, Serialize};
use tabenc_nn::Rng;

use super::DataTable;
use crate::error::{Error, IoContext, Result};

/// Levels with fewer samples than this cannot be stratified and go to train.
pub const MIN_STRATUM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            validation_fraction: 0.15,
            test_fraction: 0.15,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.validation_fraction, self.test_fraction];
        if f.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions {f:?} must be in [0,1] and sum to 1")));
        }
        Ok(())
    }

    /// Split sizes for `n` rows: train and validation rounded, test the rest.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = ((self.train_fraction * n as f64).round() as usize).min(n);
        let validation = ((self.validation_fraction * n as f64).round() as usize).min(n - train);
        (train, validation, n - train - validation)
    }
}

/// Row positions (into the source table) of each part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Split {
    pub spec: SplitSpec,
    pub indices: SplitIndices,
    pub train: DataTable,
    pub validation: DataTable,
    pub test: DataTable,
}

#[derive(Serialize, Deserialize)]
struct SplitSidecar {
    seed: u64,
    train_fraction: f64,
    validation_fraction: f64,
    test_fraction: f64,
    /// Original file row ids per part.
    train: Vec<usize>,
    validation: Vec<usize>,
    test: Vec<usize>,
}

/// Per-level counts for each part: every entry is the floor or ceiling of
/// its proportional quota `n_level * size_part / n`, with row sums equal to
/// the level sizes and column sums equal to the part sizes. The rounding
/// directions come from a max-flow over the fractional cells.
pub fn controlled_rounding(level_sizes: &[usize], part_sizes: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = level_sizes.iter().sum();
    assert_eq!(n, part_sizes.iter().sum::<usize>(), "level and part totals differ");
    let (k, p) = (level_sizes.len(), part_sizes.len());
    if n == 0 {
        return vec![vec![0; p]; k];
    }
    let mut counts: Vec<Vec<usize>> = level_sizes
        .iter()
        .map(|&nl| part_sizes.iter().map(|&sp| nl * sp / n).collect())
        .collect();
    // nodes: 0 source, 1..=k levels, k+1..=k+p parts, k+p+1 sink
    let nodes = k + p + 2;
    let sink = nodes - 1;
    let mut cap = vec![vec![0usize; nodes]; nodes];
    for l in 0..k {
        cap[0][1 + l] = level_sizes[l] - counts[l].iter().sum::<usize>();
        for q in 0..p {
            if !(level_sizes[l] * part_sizes[q]).is_multiple_of(n) {
                cap[1 + l][1 + k + q] = 1;
            }
        }
    }
    for q in 0..p {
        cap[1 + k + q][sink] = part_sizes[q] - counts.iter().map(|c| c[q]).sum::<usize>();
    }
    let need: usize = cap[0].iter().sum();
    let mut flow = 0;
    while let Some(path) = augmenting_path(&cap, sink) {
        for w in path.windows(2) {
            cap[w[0]][w[1]] -= 1;
            cap[w[1]][w[0]] += 1;
        }
        flow += 1;
    }
    assert_eq!(flow, need, "controlled rounding is always feasible");
    for l in 0..k {
        for q in 0..p {
            // a used level->part edge leaves residual capacity on the reverse edge
            if cap[1 + k + q][1 + l] > 0 {
                counts[l][q] += 1;
            }
        }
    }
    counts
}

fn augmenting_path(cap: &[Vec<usize>], sink: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; cap.len()];
    prev[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for v in 0..cap.len() {
            if cap[u][v] > 0 && prev[v] == usize::MAX {
                prev[v] = u;
                if v == sink {
                    let mut path = vec![sink];
                    let mut x = sink;
                    while x != 0 {
                        x = prev[x];
                        path.push(x);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(v);
            }
        }
    }
    None
}

/// Stratified partition positions. Per-level counts come from
/// [`controlled_rounding`]; which rows of a level land in which part is
/// decided by a seeded shuffle.
pub fn stratified_indices(codes: &[usize], spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let n = codes.len();
    let n_levels = codes.iter().max().map_or(0, |m| m + 1);
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); n_levels];
    for (i, &c) in codes.iter().enumerate() {
        by_level[c].push(i);
    }
    let mut train = Vec::new();
    let mut strata = Vec::new();
    for (level, rows) in by_level.into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < MIN_STRATUM {
            log::warn!(
                "target level {level} has {} sample(s); placed in train without stratification",
                rows.len()
            );
            train.extend(rows);
        } else {
            strata.push(rows);
        }
    }
    let (n_train, n_val, _) = spec.sizes(n);
    let rest: usize = strata.iter().map(Vec::len).sum();
    let n_train = n_train.saturating_sub(train.len()).min(rest);
    let n_val = n_val.min(rest - n_train);
    let part_sizes = [n_train, n_val, rest - n_train - n_val];
    let sizes: Vec<usize> = strata.iter().map(Vec::len).collect();
    let counts = controlled_rounding(&sizes, &part_sizes);

    let mut rng = Rng::new(spec.seed);
    let mut out = SplitIndices {
        train,
        validation: Vec::new(),
        test: Vec::new(),
    };
    for (mut rows, c) in strata.into_iter().zip(counts) {
        rng.shuffle(&mut rows);
        out.train.extend_from_slice(&rows[..c[0]]);
        out.validation.extend_from_slice(&rows[c[0]..c[0] + c[1]]);
        out.test.extend_from_slice(&rows[c[0] + c[1]..]);
    }
    out.train.sort_unstable();
    out.validation.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

pub fn split(table: &DataTable, spec: &SplitSpec) -> Result<Split> {
    let indices = stratified_indices(&table.target_codes(), spec)?;
    Ok(Split {
        spec: spec.clone(),
        train: table.select_rows(&indices.train),
        validation: table.select_rows(&indices.validation),
        test: table.select_rows(&indices.test),
        indices,
    })
}

impl Split {
    pub fn parts(&self) -> [(&'static str, &DataTable); 3] {
        [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ]
    }

    /// Writes `train.csv`, `validation.csv`, `test.csv` and `split.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).at(dir)?;
        for (name, t) in self.parts() {
            t.write_csv(&dir.join(format!("{name}.csv")))?;
        }
        self.write_sidecar(&dir.join("split.json"))
    }

    /// Split parameters and the original row ids of each part, as JSON.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let sidecar = SplitSidecar {
            seed: self.spec.seed,
            train_fraction: self.spec.train_fraction,
            validation_fraction: self.spec.validation_fraction,
            test_fraction: self.spec.test_fraction,
            train: self.train.row_ids().to_vec(),
            validation: self.validation.row_ids().to_vec(),
            test: self.test.row_ids().to_vec(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&sidecar)?).at(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hundred_rows_split_exactly() {
        let codes: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let s = stratified_indices(&codes, &SplitSpec { seed: 1, ..SplitSpec::default() }).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (70, 15, 15));
    }

    #[test]
    fn ninety_seven_rows() {
        // 0.7 * 97 = 67.9 -> 68, 0.15 * 97 = 14.55 -> 15, remainder 14
        let codes: Vec<usize> = (0..97).map(|i| i % 3).collect();
        let s = stratified_indices(&codes, &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (68, 15, 14));
    }

    #[test]
    fn tiny_level_goes_to_train() {
        let mut codes: Vec<usize> = (0..40).map(|i| i % 2).collect();
        codes.extend([2, 2]);
        let s = stratified_indices(&codes, &SplitSpec::default()).unwrap();
        assert!(s.train.contains(&40) && s.train.contains(&41));
    }

    #[test]
    fn bad_fractions_rejected() {
        let spec = SplitSpec {
            train_fraction: 0.8,
            ..SplitSpec::default()
        };
        assert!(stratified_indices(&[0, 1, 0, 1], &spec).is_err());
    }

    proptest! {
        #[test]
        fn controlled_rounding_is_floor_or_ceil_with_exact_margins(
            levels in prop::collection::vec(0usize..60, 1..8),
            cut in (0.0f64..1.0, 0.0f64..1.0),
        ) {
            let n: usize = levels.iter().sum();
            let a = (cut.0 * n as f64) as usize;
            let b = ((cut.1 * (n - a) as f64) as usize).min(n - a);
            let parts = [a, b, n - a - b];
            let c = controlled_rounding(&levels, &parts);
            for (l, row) in c.iter().enumerate() {
                prop_assert_eq!(row.iter().sum::<usize>(), levels[l]);
                for q in 0..3 {
                    let lo = levels[l] * parts[q] / n.max(1);
                    prop_assert!(row[q] == lo || row[q] == lo + 1);
                }
            }
            for q in 0..3 {
                prop_assert_eq!(c.iter().map(|r| r[q]).sum::<usize>(), parts[q]);
            }
        }

        #[test]
        fn disjoint_exhaustive_stratified_deterministic(
            codes in prop::collection::vec(0usize..4, 12..400),
            seed in 0u64..50,
            tr in 0.4f64..0.8,
        ) {
            let va = (1.0 - tr) / 2.0;
            let spec = SplitSpec { train_fraction: tr, validation_fraction: va, test_fraction: 1.0 - tr - va, seed };
            let s = stratified_indices(&codes, &spec).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..codes.len()).collect::<Vec<_>>());
            prop_assert_eq!(&s, &stratified_indices(&codes, &spec).unwrap());

            let (n_tr, n_va, n_te) = spec.sizes(codes.len());
            let tiny: usize = (0..4).map(|l| codes.iter().filter(|&&c| c == l).count()).filter(|&c| c < MIN_STRATUM).sum();
            prop_assert_eq!(s.train.len(), n_tr.max(tiny));
            if tiny == 0 {
                prop_assert_eq!((s.validation.len(), s.test.len()), (n_va, n_te));
                for level in 0..4 {
                    let frac = codes.iter().filter(|&&c| c == level).count() as f64 / codes.len() as f64;
                    for part in [&s.train, &s.validation, &s.test] {
                        let got = part.iter().filter(|&&r| codes[r] == level).count() as f64;
                        prop_assert!((got - frac * part.len() as f64).abs() < 1.0,
                            "level {} got {} of {}", level, got, part.len());
                    }
                }
            }
        }
    }
}
