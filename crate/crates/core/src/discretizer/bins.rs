use serde::{Deserialize, Serialize};

use super::prune::PrunedTree;

/// Ascending cut points defining `(-inf, e1], (e1, e2], ..., (ek, +inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub column: String,
    pub edges: Vec<f64>,
    pub chosen_alpha: f64,
    /// No usable split: the whole line is one bin.
    pub degenerate: bool,
}

impl BinEdges {
    pub fn single(column: &str) -> Self {
        BinEdges {
            column: column.to_string(),
            edges: Vec::new(),
            chosen_alpha: 0.0,
            degenerate: true,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn bin_index(&self, v: f64) -> usize {
        self.edges.partition_point(|&e| e < v)
    }

    /// Zero-padded so lexicographic order is interval order.
    pub fn label(&self, bin: usize) -> String {
        let width = self.edges.len().to_string().len().max(2);
        format!("bin_{bin:0width$}")
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.n_bins()).map(|b| self.label(b)).collect()
    }
}

pub fn extract_bins(column: &str, pruned: &PrunedTree<'_>, chosen_alpha: f64) -> BinEdges {
    let edges = pruned.thresholds();
    BinEdges {
        column: column.to_string(),
        degenerate: edges.is_empty(),
        edges,
        chosen_alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edges(e: &[f64]) -> BinEdges {
        BinEdges {
            column: "x".into(),
            edges: e.to_vec(),
            chosen_alpha: 0.0,
            degenerate: e.is_empty(),
        }
    }

    #[test]
    fn boundary_belongs_to_the_lower_bin() {
        let b = edges(&[5.0]);
        assert_eq!(b.bin_index(5.0), 0);
        assert_eq!(b.bin_index(5.1), 1);
    }

    #[test]
    fn outer_bins_are_open() {
        let b = edges(&[3.0, 7.0]);
        assert_eq!(b.n_bins(), 3);
        assert_eq!(b.bin_index(-100.0), 0);
        assert_eq!(b.bin_index(100.0), 2);
        assert_eq!(b.bin_index(f64::MAX), 2);
        assert_eq!(b.bin_index(f64::MIN), 0);
    }

    #[test]
    fn labels_sort_in_interval_order() {
        let b = edges(&(0..12).map(f64::from).collect::<Vec<_>>());
        let labels = b.labels();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        assert_eq!(labels[3], "bin_03");
    }

    proptest! {
        #[test]
        fn assignment_is_total_and_monotone(mut e in prop::collection::vec(-1e6f64..1e6, 0..20), a in -2e6f64..2e6, b in -2e6f64..2e6) {
            e.sort_by(f64::total_cmp);
            e.dedup();
            let be = edges(&e);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(be.bin_index(lo) <= be.bin_index(hi));
            prop_assert!(be.bin_index(hi) < be.n_bins());
        }
    }
}
