use tabenc_nn::Rng;

use super::bins::BinEdges;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansFit {
    pub edges: BinEdges,
    /// Sorted final centroids.
    pub centroids: Vec<f64>,
    /// Within-cluster sum of squares after each iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn nearest(v: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    for (j, c) in centroids.iter().enumerate() {
        if (v - c).abs() < (v - centroids[best]).abs() {
            best = j;
        }
    }
    best
}

/// One-dimensional Lloyd iterations from a k-means++ start; edges are the
/// midpoints between adjacent sorted centroids. An emptied cluster is moved
/// to the point farthest from its current centroid.
pub fn kmeans_bins(column: &str, x: &[f64], k: usize, max_iter: usize, seed: u64) -> Result<KMeansFit> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let mut distinct = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::Degenerate(format!("{} distinct values for k = {k}", distinct.len())));
    }
    let mut rng = Rng::new(seed);
    let mut centroids = vec![x[rng.below(x.len())]];
    while centroids.len() < k {
        let d2: Vec<f64> = x
            .iter()
            .map(|&v| {
                let c = centroids[nearest(v, &centroids)];
                (v - c) * (v - c)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let mut target = rng.uniform() * total;
        let mut pick = d2.iter().rposition(|&d| d > 0.0).expect("k distinct values exist");
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        centroids.push(x[pick]);
    }
    let mut assign = vec![usize::MAX; x.len()];
    let mut objective = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let next: Vec<usize> = x.iter().map(|&v| nearest(v, &centroids)).collect();
        let changed = next != assign;
        assign = next;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&v, &a) in x.iter().zip(&assign) {
            sums[a] += v;
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            } else {
                let far = (0..x.len())
                    .max_by(|&a, &b| {
                        let da = (x[a] - centroids[assign[a]]).abs();
                        let db = (x[b] - centroids[assign[b]]).abs();
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap();
                log::debug!("k-means cluster {j} emptied; reseeded at {}", x[far]);
                centroids[j] = x[far];
                assign[far] = j;
            }
        }
        objective.push(
            x.iter()
                .zip(&assign)
                .map(|(&v, &a)| (v - centroids[a]).powi(2))
                .sum(),
        );
        if !changed {
            break;
        }
    }
    centroids.sort_by(f64::total_cmp);
    let edges = centroids.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
    Ok(KMeansFit {
        edges: BinEdges {
            column: column.to_string(),
            edges,
            chosen_alpha: 0.0,
            degenerate: false,
        },
        centroids,
        objective,
        iterations,
    })
}
