use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Split point for decision nodes; samples with `x <= threshold` go left.
    pub threshold: Option<f64>,
    pub level_counts: Vec<usize>,
    /// Arena indices of (left, right).
    pub children: Option<(usize, usize)>,
    /// Entropy of `level_counts` in bits.
    pub impurity: f64,
    pub depth: usize,
}

impl TreeNode {
    pub fn n_samples(&self) -> usize {
        self.level_counts.iter().sum()
    }

    /// Most frequent level, smallest index on ties.
    pub fn majority(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.level_counts.iter().enumerate() {
            if c > self.level_counts[best] {
                best = i;
            }
        }
        best
    }

    /// Resubstitution misclassification count when this node predicts its majority.
    pub fn errors(&self) -> usize {
        self.n_samples() - self.level_counts[self.majority()]
    }
}

/// Binary classification tree on one feature; node 0 is the root and
/// children always follow their parent in the arena.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub n_levels: usize,
    pub max_depth: usize,
}

pub fn entropy_bits(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

impl Tree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_none()).count()
    }

    pub fn n_decision_nodes(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    /// Predicted level, descending at most `depth_limit` levels.
    pub fn predict_limited(&self, x: f64, depth_limit: usize) -> usize {
        let mut node = &self.nodes[0];
        while let (Some((l, r)), Some(t)) = (node.children, node.threshold) {
            if node.depth >= depth_limit {
                break;
            }
            node = &self.nodes[if x <= t { l } else { r }];
        }
        node.majority()
    }

    pub fn predict(&self, x: f64) -> usize {
        self.predict_limited(x, usize::MAX)
    }
}

/// Grows a CART tree that splits at the midpoint minimizing the weighted
/// child entropy; equal-entropy candidates resolve to the smaller threshold.
/// Growth stops at `max_depth`, at pure nodes and at nodes without a
/// candidate split.
pub fn grow_tree(x: &[f64], y: &[usize], n_levels: usize, max_depth: usize) -> Result<Tree> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 paired samples, got {} x and {} y",
            x.len(),
            y.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&v| v >= n_levels) {
        return Err(Error::Config(format!("level {bad} out of range for {n_levels} levels")));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::Degenerate("target has a single level".into()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut tree = Tree {
        nodes: Vec::new(),
        n_levels,
        max_depth,
    };
    grow(&mut tree, x, y, &order, 0);
    Ok(tree)
}

fn grow(tree: &mut Tree, x: &[f64], y: &[usize], rows: &[usize], depth: usize) -> usize {
    let mut counts = vec![0usize; tree.n_levels];
    for &r in rows {
        counts[y[r]] += 1;
    }
    let impurity = entropy_bits(&counts);
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode {
        threshold: None,
        level_counts: counts.clone(),
        children: None,
        impurity,
        depth,
    });
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if depth >= tree.max_depth || pure || rows.len() < 2 {
        return id;
    }
    let Some((cut, threshold)) = best_split(x, y, rows, &counts) else {
        return id;
    };
    let left = grow(tree, x, y, &rows[..cut], depth + 1);
    let right = grow(tree, x, y, &rows[cut..], depth + 1);
    let node = &mut tree.nodes[id];
    node.threshold = Some(threshold);
    node.children = Some((left, right));
    id
}

/// `rows` sorted by x. Returns the left-partition length and threshold.
fn best_split(x: &[f64], y: &[usize], rows: &[usize], total: &[usize]) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut left = vec![0usize; total.len()];
    let mut right = total.to_vec();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n - 1 {
        let level = y[rows[i]];
        left[level] += 1;
        right[level] -= 1;
        if x[rows[i]] == x[rows[i + 1]] {
            continue;
        }
        let nl = (i + 1) as f64;
        let score = nl * entropy_bits(&left) + (n as f64 - nl) * entropy_bits(&right);
        if best.is_none_or(|(b, _)| score < b) {
            best = Some((score, i + 1));
        }
    }
    best.map(|(_, cut)| {
        let (a, b) = (x[rows[cut - 1]], x[rows[cut]]);
        let mid = a + (b - a) / 2.0;
        (cut, if mid < b { mid } else { a })
    })
}
