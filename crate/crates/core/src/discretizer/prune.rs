use std::cmp::Ordering;

use super::tree::Tree;

/// A tree with some decision nodes collapsed into leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedTree<'a> {
    pub tree: &'a Tree,
    /// `collapsed[i]` turns node `i` into a leaf.
    pub collapsed: Vec<bool>,
}

/// Effective alpha `delta_errors / (n * (leaves - 1))`, kept as an exact
/// fraction for comparisons.
#[derive(Clone, Copy, Debug)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn cmp(self, other: Ratio) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl<'a> PrunedTree<'a> {
    pub fn full(tree: &'a Tree) -> Self {
        PrunedTree {
            tree,
            collapsed: vec![false; tree.nodes.len()],
        }
    }

    fn is_leaf(&self, i: usize) -> bool {
        self.collapsed[i] || self.tree.nodes[i].children.is_none()
    }

    /// Nodes reachable from the root, in arena order.
    pub fn active(&self) -> Vec<usize> {
        let mut on = vec![false; self.tree.nodes.len()];
        on[0] = true;
        for i in 0..self.tree.nodes.len() {
            if on[i] && !self.is_leaf(i) {
                let (l, r) = self.tree.nodes[i].children.unwrap();
                on[l] = true;
                on[r] = true;
            }
        }
        (0..on.len()).filter(|&i| on[i]).collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.active().into_iter().filter(|&i| self.is_leaf(i)).count()
    }

    pub fn n_decision_nodes(&self) -> usize {
        self.active().into_iter().filter(|&i| !self.is_leaf(i)).count()
    }

    /// Total resubstitution errors over active leaves.
    pub fn errors(&self) -> usize {
        self.active()
            .into_iter()
            .filter(|&i| self.is_leaf(i))
            .map(|i| self.tree.nodes[i].errors())
            .sum()
    }

    /// Sorted distinct thresholds of the active decision nodes.
    pub fn thresholds(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .active()
            .into_iter()
            .filter(|&i| !self.is_leaf(i))
            .filter_map(|i| self.tree.nodes[i].threshold)
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    pub fn predict(&self, x: f64) -> usize {
        let mut i = 0;
        while !self.is_leaf(i) {
            let node = &self.tree.nodes[i];
            let (l, r) = node.children.unwrap();
            i = if x <= node.threshold.unwrap() { l } else { r };
        }
        self.tree.nodes[i].majority()
    }

    /// (errors, leaves) of the active subtree below each node; children
    /// follow parents in the arena, so a reverse sweep suffices.
    fn branch_stats(&self) -> Vec<(usize, usize)> {
        let mut stats = vec![(0, 0); self.tree.nodes.len()];
        for i in (0..self.tree.nodes.len()).rev() {
            stats[i] = if self.is_leaf(i) {
                (self.tree.nodes[i].errors(), 1)
            } else {
                let (l, r) = self.tree.nodes[i].children.unwrap();
                (stats[l].0 + stats[r].0, stats[l].1 + stats[r].1)
            };
        }
        stats
    }

    /// Active decision nodes with their effective alpha.
    fn link_strengths(&self) -> Vec<(usize, Ratio)> {
        let n = self.tree.root().n_samples() as u64;
        let stats = self.branch_stats();
        self.active()
            .into_iter()
            .filter(|&i| !self.is_leaf(i))
            .map(|i| {
                let (branch_errors, leaves) = stats[i];
                let delta = self.tree.nodes[i].errors() - branch_errors;
                (
                    i,
                    Ratio {
                        num: delta as u64,
                        den: n * (leaves as u64 - 1),
                    },
                )
            })
            .collect()
    }

    fn weakest(&self) -> Option<(Ratio, Vec<usize>)> {
        let links = self.link_strengths();
        let min = links.iter().map(|l| l.1).min_by(|a, b| a.cmp(*b))?;
        let nodes = links
            .into_iter()
            .filter(|l| l.1.cmp(min) == Ordering::Equal)
            .map(|l| l.0)
            .collect();
        Some((min, nodes))
    }
}

/// Weakest-link path: `(alpha, subtree)` pairs with strictly increasing
/// alpha, starting from `(0, full tree)`. Risk is the misclassified fraction
/// of the root's samples, so alphas are comparable across trees grown on
/// different sample counts.
pub fn weakest_link_path(tree: &Tree) -> Vec<(f64, PrunedTree<'_>)> {
    let mut current = PrunedTree::full(tree);
    let mut path = vec![(0.0, current.clone())];
    let mut last: Option<Ratio> = None;
    while let Some((alpha, nodes)) = current.weakest() {
        for i in nodes {
            current.collapsed[i] = true;
        }
        if alpha.num == 0 {
            continue;
        }
        match last {
            Some(prev) if prev.cmp(alpha) == Ordering::Equal => {
                path.last_mut().unwrap().1 = current.clone();
            }
            _ => path.push((alpha.value(), current.clone())),
        }
        last = Some(alpha);
    }
    path
}

/// Smallest subtree minimizing `errors / n + alpha * leaves`; alpha = 0
/// keeps the full tree.
pub fn prune_at(tree: &Tree, alpha: f64) -> PrunedTree<'_> {
    let mut current = PrunedTree::full(tree);
    if alpha <= 0.0 {
        return current;
    }
    while let Some((g, nodes)) = current.weakest() {
        if g.value() > alpha {
            break;
        }
        for i in nodes {
            current.collapsed[i] = true;
        }
    }
    current
}

#[cfg(test)]
mod tests {
    use super::super::tree::grow_tree;
    use super::*;

    fn toy() -> Tree {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y = vec![0, 0, 1, 0, 0, 1, 1, 0, 1, 1];
        grow_tree(&x, &y, 2, 7).unwrap()
    }

    #[test]
    fn alpha_zero_keeps_everything() {
        let t = toy();
        assert_eq!(prune_at(&t, 0.0).n_leaves(), t.n_leaves());
        assert_eq!(weakest_link_path(&t)[0].1.n_leaves(), t.n_leaves());
    }

    #[test]
    fn huge_alpha_leaves_the_root() {
        let t = toy();
        let p = prune_at(&t, 1e9);
        assert_eq!(p.n_leaves(), 1);
        assert_eq!(p.thresholds(), Vec::<f64>::new());
    }

    #[test]
    fn path_is_strictly_shrinking_and_ends_at_root() {
        let t = toy();
        let path = weakest_link_path(&t);
        for w in path.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1.n_leaves() < w[0].1.n_leaves());
        }
        assert_eq!(path.last().unwrap().1.n_leaves(), 1);
        for (alpha, sub) in &path[1..] {
            assert_eq!(&prune_at(&t, *alpha), sub);
        }
    }
}
