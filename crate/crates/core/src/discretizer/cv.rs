use serde::{Deserialize, Serialize};
use tabenc_nn::Rng;

use super::prune::{prune_at, weakest_link_path};
use super::tree::{grow_tree, Tree};
use crate::error::{Error, Result};

/// Floor on the accuracy std in the mean/std selection ratio.
pub const STD_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub mean: f64,
    /// Population std over scored folds.
    pub std: f64,
    pub folds: usize,
}

impl CvScore {
    fn from_scores(scores: &[f64]) -> Option<Self> {
        if scores.is_empty() {
            return None;
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        Some(CvScore {
            mean,
            std: var.sqrt(),
            folds: scores.len(),
        })
    }

    pub fn ratio(&self) -> f64 {
        self.mean / self.std.max(STD_FLOOR)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningPath {
    /// Ascending, starting at 0.
    pub alphas: Vec<f64>,
    /// Leaves of the full-data tree pruned at each alpha.
    pub subtree_sizes: Vec<usize>,
    pub cv_scores: Vec<Option<CvScore>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub index: usize,
    /// No scored candidate kept a decision node.
    pub fallback: bool,
}

/// Fold id per sample: levels are shuffled separately and dealt round-robin,
/// continuing the rotation across levels so fold sizes differ by at most one.
pub fn stratified_folds(y: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let n_levels = y.iter().max().map_or(0, |m| m + 1);
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); n_levels];
    for (i, &v) in y.iter().enumerate() {
        by_level[v].push(i);
    }
    let mut rng = Rng::new(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for rows in &mut by_level {
        rng.shuffle(rows);
        for &r in rows.iter() {
            fold[r] = next % k;
            next += 1;
        }
    }
    fold
}

struct FoldData {
    train_x: Vec<f64>,
    train_y: Vec<usize>,
    test_x: Vec<f64>,
    test_y: Vec<usize>,
}

fn fold_data(x: &[f64], y: &[usize], folds: &[usize], k: usize) -> Vec<Option<FoldData>> {
    (0..k)
        .map(|f| {
            let mut d = FoldData {
                train_x: Vec::new(),
                train_y: Vec::new(),
                test_x: Vec::new(),
                test_y: Vec::new(),
            };
            for i in 0..x.len() {
                if folds[i] == f {
                    d.test_x.push(x[i]);
                    d.test_y.push(y[i]);
                } else {
                    d.train_x.push(x[i]);
                    d.train_y.push(y[i]);
                }
            }
            let single_level = d.train_y.iter().all(|&v| v == d.train_y[0]);
            if d.train_y.len() < 2 || single_level || d.test_y.is_empty() {
                log::warn!("cv fold {f} skipped: training part has a single target level or a part is empty");
                None
            } else {
                Some(d)
            }
        })
        .collect()
}

fn accuracy(pred: impl Fn(f64) -> usize, x: &[f64], y: &[usize]) -> f64 {
    let hits = x.iter().zip(y).filter(|&(&v, &t)| pred(v) == t).count();
    hits as f64 / x.len() as f64
}

/// Mean held-out accuracy of unpruned trees at each depth `1..=max_depth`.
/// One tree per fold is grown to `max_depth` and evaluated truncated, which
/// equals growing to each depth since splits are chosen greedily top-down.
pub fn depth_scores(
    x: &[f64],
    y: &[usize],
    n_levels: usize,
    max_depth: usize,
    folds: &[usize],
    k: usize,
) -> Result<Vec<Option<CvScore>>> {
    let data = fold_data(x, y, folds, k);
    let mut per_depth = vec![Vec::new(); max_depth];
    for d in data.iter().flatten() {
        let tree = grow_tree(&d.train_x, &d.train_y, n_levels, max_depth)?;
        for (depth, scores) in per_depth.iter_mut().enumerate() {
            scores.push(accuracy(|v| tree.predict_limited(v, depth + 1), &d.test_x, &d.test_y));
        }
    }
    Ok(per_depth.iter().map(|s| CvScore::from_scores(s)).collect())
}

/// Best depth by mean CV accuracy, smallest on ties.
pub fn best_depth(scores: &[Option<CvScore>]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = s {
            if best.is_none_or(|(b, _)| s.mean > b) {
                best = Some((s.mean, i + 1));
            }
        }
    }
    best.map(|b| b.1)
}

/// Weakest-link path of `tree` with each alpha scored by k-fold CV: on each
/// fold a tree is regrown to `tree.max_depth`, pruned at the alpha and
/// scored on the held-out part.
pub fn pruning_path(tree: &Tree, x: &[f64], y: &[usize], folds: &[usize], k: usize) -> Result<PruningPath> {
    if tree.n_decision_nodes() == 0 {
        return Err(Error::Degenerate("tree has no decision node".into()));
    }
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let path = weakest_link_path(tree);
    let alphas: Vec<f64> = path.iter().map(|p| p.0).collect();
    let subtree_sizes = path.iter().map(|p| p.1.n_leaves()).collect();
    let mut scores = vec![Vec::new(); alphas.len()];
    for d in fold_data(x, y, folds, k).iter().flatten() {
        let fold_tree = grow_tree(&d.train_x, &d.train_y, tree.n_levels, tree.max_depth)?;
        for (a, s) in alphas.iter().zip(scores.iter_mut()) {
            let pruned = prune_at(&fold_tree, *a);
            s.push(accuracy(|v| pruned.predict(v), &d.test_x, &d.test_y));
        }
    }
    Ok(PruningPath {
        alphas,
        subtree_sizes,
        cv_scores: scores.iter().map(|s| CvScore::from_scores(s)).collect(),
    })
}

/// Alpha maximizing mean/std accuracy among scored alphas whose subtree
/// keeps a decision node; ties go to the smaller alpha. Without such a
/// candidate the smallest alpha is returned, flagged as fallback.
pub fn select_alpha(path: &PruningPath) -> Result<AlphaChoice> {
    if path.alphas.is_empty() {
        return Err(Error::Degenerate("empty pruning path".into()));
    }
    let mut best: Option<(f64, usize)> = None;
    for (i, score) in path.cv_scores.iter().enumerate() {
        let Some(score) = score else { continue };
        if path.subtree_sizes[i] < 2 {
            continue;
        }
        let r = score.ratio();
        if best.is_none_or(|(b, _)| r > b) {
            best = Some((r, i));
        }
    }
    Ok(match best {
        Some((_, index)) => AlphaChoice {
            alpha: path.alphas[index],
            index,
            fallback: false,
        },
        None => AlphaChoice {
            alpha: path.alphas[0],
            index: 0,
            fallback: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(scores: &[(f64, f64)], sizes: &[usize]) -> PruningPath {
        PruningPath {
            alphas: (0..scores.len()).map(|i| i as f64 * 0.01).collect(),
            subtree_sizes: sizes.to_vec(),
            cv_scores: scores
                .iter()
                .map(|&(mean, std)| Some(CvScore { mean, std, folds: 5 }))
                .collect(),
        }
    }

    #[test]
    fn ratio_decides() {
        let c = select_alpha(&path(&[(0.9, 0.01), (0.89, 0.10)], &[4, 2])).unwrap();
        assert_eq!((c.index, c.fallback), (0, false));
    }

    #[test]
    fn root_only_candidates_fall_back_to_smallest_alpha() {
        let c = select_alpha(&path(&[(0.9, 0.01), (0.95, 0.01)], &[1, 1])).unwrap();
        assert_eq!((c.index, c.fallback), (0, true));
    }

    #[test]
    fn zero_std_uses_the_floor() {
        let c = select_alpha(&path(&[(0.8, 0.0), (0.9, 0.0)], &[3, 2])).unwrap();
        assert_eq!(c.index, 1);
    }

    #[test]
    fn empty_path_is_degenerate() {
        let p = PruningPath {
            alphas: vec![],
            subtree_sizes: vec![],
            cv_scores: vec![],
        };
        assert!(select_alpha(&p).is_err());
    }

    #[test]
    fn folds_are_stratified_and_balanced() {
        let y: Vec<usize> = (0..103).map(|i| usize::from(i % 4 == 0)).collect();
        let f = stratified_folds(&y, 5, 3);
        for fold in 0..5 {
            let size = f.iter().filter(|&&v| v == fold).count();
            assert!((20..=21).contains(&size));
        }
        assert_eq!(f, stratified_folds(&y, 5, 3));
    }

    proptest! {
        #[test]
        fn equal_ratios_pick_the_smaller_alpha(mean in 0.1f64..1.0, std in 0.001f64..0.3, n in 2usize..6, pick in 0usize..6) {
            let mut scores = vec![(mean * 0.5, std); n];
            let pick = pick % n;
            for s in scores.iter_mut().skip(pick) {
                *s = (mean, std);
            }
            let sizes: Vec<usize> = (0..n).map(|i| n + 1 - i).collect();
            prop_assert_eq!(select_alpha(&path(&scores, &sizes)).unwrap().index, pick);
        }
    }
}
