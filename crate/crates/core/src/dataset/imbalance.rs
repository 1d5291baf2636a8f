use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DataTable;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    /// Shannon evenness, entropy over its maximum `ln k`.
    pub evenness: f64,
    pub imbalance: f64,
    pub level_counts: BTreeMap<String, usize>,
}

/// `1 - H / ln k` over the nonempty counts.
pub fn imbalance_from_counts(counts: &[usize]) -> Result<f64> {
    let nonempty: Vec<f64> = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64).collect();
    let k = nonempty.len();
    if k < 2 {
        return Err(Error::Degenerate(format!("{k} nonempty target level(s)")));
    }
    let n: f64 = nonempty.iter().sum();
    let h: f64 = -nonempty.iter().map(|&c| (c / n) * (c / n).ln()).sum::<f64>();
    Ok((1.0 - h / (k as f64).ln()).clamp(0.0, 1.0))
}

pub fn shannon_imbalance(table: &DataTable) -> Result<ImbalanceReport> {
    let mut level_counts = BTreeMap::new();
    for v in table.target() {
        *level_counts.entry(v.clone()).or_insert(0usize) += 1;
    }
    let counts: Vec<usize> = level_counts.values().copied().collect();
    let imbalance = imbalance_from_counts(&counts)?;
    Ok(ImbalanceReport {
        evenness: 1.0 - imbalance,
        imbalance,
        level_counts,
    })
}
