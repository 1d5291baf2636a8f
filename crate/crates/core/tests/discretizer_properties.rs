use proptest::prelude::*;
use tabenc::dataset::{imbalance_from_counts, DataTable};
use tabenc::discretizer::{grow_tree, weakest_link_path, BinEdges, DiscretizerConfig, FittedDiscretizer};

proptest! {
    #[test]
    fn bin_assignment_is_total(mut edges in prop::collection::vec(-1e6f64..1e6, 0..8), v in any::<f64>()) {
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let bins = BinEdges { edges, ..BinEdges::single("x") };
        let idx = bins.bin_index(v);
        prop_assert!(idx < bins.n_bins());
        if !v.is_nan() {
            prop_assert!(idx == 0 || bins.edges[idx - 1] < v);
            prop_assert!(idx == bins.edges.len() || v <= bins.edges[idx]);
        }
        prop_assert!(bins.bin_index(f64::MAX) < bins.n_bins());
        prop_assert_eq!(bins.bin_index(f64::MIN), 0);
    }

    #[test]
    fn pruned_size_shrinks_along_the_path(
        x in prop::collection::vec(0u8..40, 10..120),
        flips in prop::collection::vec(any::<bool>(), 120),
    ) {
        let xs: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        let ys: Vec<usize> = x.iter().zip(&flips).map(|(&v, &f)| usize::from((v % 13 < 6) ^ f)).collect();
        prop_assume!(ys.iter().any(|&c| c != ys[0]));
        let tree = grow_tree(&xs, &ys, 2, 5).unwrap();
        let path = weakest_link_path(&tree);
        for w in path.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
            prop_assert!(w[1].1.n_leaves() < w[0].1.n_leaves());
        }
    }

    #[test]
    fn imbalance_ignores_relabeling_and_scaling(
        counts in prop::collection::vec(1usize..500, 2..8),
        scale in 1usize..20,
        rot in 0usize..8,
    ) {
        let base = imbalance_from_counts(&counts).unwrap();
        let mut shuffled = counts.clone();
        shuffled.rotate_left(rot % counts.len());
        let scaled: Vec<usize> = counts.iter().map(|c| c * scale).collect();
        prop_assert!((imbalance_from_counts(&shuffled).unwrap() - base).abs() < 1e-12);
        prop_assert!((imbalance_from_counts(&scaled).unwrap() - base).abs() < 1e-12);
    }
}

#[test]
fn monotone_data_gives_monotone_bins() {
    // positive rate rises with x in steps
    let n = 900;
    let x: Vec<f64> = (0..n).map(|i| (i * 7 % n) as f64 / 9.0).collect();
    let y: Vec<String> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let rate = if v < 30.0 { 1 } else if v < 60.0 { 5 } else { 9 };
            if i % 10 < rate { "p" } else { "n" }.to_string()
        })
        .collect();
    let t = DataTable::new(
        vec!["x".into(), "y".into()],
        vec![x.iter().map(|v| v.to_string()).collect(), y.clone()],
        "y",
    )
    .unwrap();
    let fitted = FittedDiscretizer::fit(&t, &DiscretizerConfig::default()).unwrap();
    let bins = &fitted.bins[0];
    assert!(bins.n_bins() >= 2, "{:?}", bins.edges);
    let mut rates = vec![(0usize, 0usize); bins.n_bins()];
    for (v, label) in x.iter().zip(&y) {
        let r = &mut rates[bins.bin_index(*v)];
        r.0 += usize::from(label == "p");
        r.1 += 1;
    }
    let rates: Vec<f64> = rates.iter().map(|&(p, c)| p as f64 / c as f64).collect();
    assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
}
