//! Column-at-a-time categorical encoders. Every encoder is fitted on the
//! training column only and maps each level to a fixed row of reals; unseen
//! levels get a reserved unknown row (or, for string similarity, are scored
//! against the fitted levels directly).

mod jaro;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use jaro::{jaro_similarity, jaro_winkler_similarity};
pub use table::{EncodedBlock, EncodedTable, TableEncoder};

use crate::error::{Error, Result};

/// Shared level that absorbs infrequent levels under `Rarelabel`.
pub const RARE_TOKEN: &str = "__rare__";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    Label,
    Ordinal,
    Rarelabel,
    Onehot,
    Binary,
    Basen,
    Frequency,
    Target,
    Summary,
    StringSimilarity,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 10] = [
        EncoderKind::Label,
        EncoderKind::Ordinal,
        EncoderKind::Rarelabel,
        EncoderKind::Onehot,
        EncoderKind::Binary,
        EncoderKind::Basen,
        EncoderKind::Frequency,
        EncoderKind::Target,
        EncoderKind::Summary,
        EncoderKind::StringSimilarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Label => "label",
            EncoderKind::Ordinal => "ordinal",
            EncoderKind::Rarelabel => "rarelabel",
            EncoderKind::Onehot => "onehot",
            EncoderKind::Binary => "binary",
            EncoderKind::Basen => "basen",
            EncoderKind::Frequency => "frequency",
            EncoderKind::Target => "target",
            EncoderKind::Summary => "summary",
            EncoderKind::StringSimilarity => "string_similarity",
        }
    }

    /// Needs the target at fit time.
    pub fn target_aware(self) -> bool {
        matches!(self, EncoderKind::Target | EncoderKind::Summary)
    }

    /// Kinds whose output keeps the level's identity recoverable. Target
    /// and frequency can still collide on levels with equal statistics.
    pub fn preserves_semantics(self) -> bool {
        matches!(
            self,
            EncoderKind::Label
                | EncoderKind::Ordinal
                | EncoderKind::Frequency
                | EncoderKind::Target
                | EncoderKind::StringSimilarity
        )
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EncoderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown encoder {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    /// Rarelabel: levels with train frequency `<= t` are merged.
    pub rare_threshold: f64,
    /// Basen digit base.
    pub base: u32,
    /// Target smoothing mass `m`.
    pub smoothing: f64,
    /// Summary quantiles, one output column each.
    pub quantiles: Vec<f64>,
    /// Summary regularization `alpha_q`.
    pub quantile_weight: f64,
    /// String similarity: add the Winkler prefix bonus.
    pub winkler: bool,
}

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec {
            kind: EncoderKind::Ordinal,
            rare_threshold: 0.05,
            base: 3,
            smoothing: 1.0,
            quantiles: vec![0.5],
            quantile_weight: 1.0,
            winkler: false,
        }
    }
}

impl EncoderSpec {
    pub fn new(kind: EncoderKind) -> Self {
        EncoderSpec {
            kind,
            ..EncoderSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("{} encoder: {what}", self.kind)));
        if !(0.0..=1.0).contains(&self.rare_threshold) {
            return bad("rare threshold must lie in [0, 1]");
        }
        if self.base < 2 {
            return bad("base must be at least 2");
        }
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return bad("smoothing mass must be positive");
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return bad("quantiles must lie in (0, 1)");
        }
        if !(self.quantile_weight > 0.0 && self.quantile_weight.is_finite()) {
            return bad("quantile weight must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedEncoder {
    pub spec: EncoderSpec,
    pub column: String,
    /// Train levels in lexicographic order.
    pub vocabulary: Vec<String>,
    pub mapping: BTreeMap<String, Vec<f64>>,
    /// Row for levels not seen at fit time.
    pub unknown: Vec<f64>,
    pub output_arity: usize,
}

/// Smoothed target mean: `a * n_iy / n_i + (1 - a) * prior` with
/// `a = n_i / (n_i + m)`.
pub fn target_encode_smoothed(n_i: f64, n_iy: f64, prior: f64, m: f64) -> f64 {
    let a = n_i / (n_i + m);
    a * (n_iy / n_i) + (1.0 - a) * prior
}

/// Quantile of ascending `sorted` by linear interpolation between order
/// statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `(q(level) * n_i + q(global) * alpha_q) / (n_i + alpha_q)`.
pub fn summary_encode(level_q: f64, n_i: f64, global_q: f64, alpha_q: f64) -> f64 {
    (level_q * n_i + global_q * alpha_q) / (n_i + alpha_q)
}

/// Digits of `value` in `base`, most significant first, left-padded to `width`.
pub fn digits(mut value: usize, base: usize, width: usize) -> Vec<f64> {
    let mut out = vec![0.0; width];
    for slot in out.iter_mut().rev() {
        *slot = (value % base) as f64;
        value /= base;
    }
    out
}

/// Digits needed to write every index below `k` in `base` (at least one).
pub fn digit_width(k: usize, base: usize) -> usize {
    let mut width = 1;
    let mut reach = base;
    while reach < k {
        reach = reach.saturating_mul(base);
        width += 1;
    }
    width
}

fn index_rows(levels: &[String], row: impl Fn(usize) -> Vec<f64>) -> BTreeMap<String, Vec<f64>> {
    levels.iter().enumerate().map(|(i, l)| (l.clone(), row(i))).collect()
}

fn counts(x: &[String]) -> BTreeMap<&str, usize> {
    let mut c = BTreeMap::new();
    for v in x {
        *c.entry(v.as_str()).or_insert(0) += 1;
    }
    c
}

impl FittedEncoder {
    /// Fits on a training column. `y` holds numeric target values (0/1 for
    /// binary tasks, the level index otherwise) and is required exactly by
    /// the target-aware kinds.
    pub fn fit(spec: &EncoderSpec, column: &str, x: &[String], y: Option<&[f64]>) -> Result<Self> {
        spec.validate()?;
        if x.is_empty() {
            return Err(Error::Degenerate(format!("cannot fit {} encoder on empty column {column}", spec.kind)));
        }
        let y = match (spec.kind.target_aware(), y) {
            (true, None) => {
                return Err(Error::Config(format!("{} encoder needs the target", spec.kind)));
            }
            (true, Some(y)) if y.len() != x.len() => {
                return Err(Error::Config(format!("{} target values for {} rows", y.len(), x.len())));
            }
            (_, y) => y,
        };
        let freq = counts(x);
        let vocabulary: Vec<String> = freq.keys().map(|s| s.to_string()).collect();
        let k = vocabulary.len();
        let n = x.len() as f64;
        let (mapping, unknown) = match spec.kind {
            EncoderKind::Label | EncoderKind::Ordinal => (index_rows(&vocabulary, |i| vec![i as f64]), vec![-1.0]),
            EncoderKind::Rarelabel => {
                let kept: Vec<&String> = vocabulary
                    .iter()
                    .filter(|l| freq[l.as_str()] as f64 / n > spec.rare_threshold)
                    .collect();
                let has_rare = kept.len() < k;
                let mut grouped: Vec<&str> = kept.iter().map(|s| s.as_str()).collect();
                if has_rare {
                    grouped.push(RARE_TOKEN);
                    grouped.sort_unstable();
                }
                let pos = |s: &str| grouped.binary_search(&s).unwrap() as f64;
                let mapping = vocabulary
                    .iter()
                    .map(|l| {
                        let g = if kept.contains(&l) { l.as_str() } else { RARE_TOKEN };
                        (l.clone(), vec![pos(g)])
                    })
                    .collect();
                (mapping, vec![if has_rare { pos(RARE_TOKEN) } else { -1.0 }])
            }
            EncoderKind::Onehot => (
                index_rows(&vocabulary, |i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()),
                vec![0.0; k],
            ),
            EncoderKind::Binary => {
                let w = digit_width(k, 2);
                (index_rows(&vocabulary, |i| digits(i, 2, w)), vec![-1.0; w])
            }
            EncoderKind::Basen => {
                let base = spec.base as usize;
                let w = digit_width(k, base);
                (index_rows(&vocabulary, |i| digits(i, base, w)), vec![-1.0; w])
            }
            EncoderKind::Frequency => (
                vocabulary.iter().map(|l| (l.clone(), vec![freq[l.as_str()] as f64 / n])).collect(),
                vec![0.0],
            ),
            EncoderKind::Target => {
                let y = y.unwrap();
                let prior = y.iter().sum::<f64>() / n;
                let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
                for (v, t) in x.iter().zip(y) {
                    *sums.entry(v.as_str()).or_insert(0.0) += t;
                }
                let mapping = vocabulary
                    .iter()
                    .map(|l| {
                        let n_i = freq[l.as_str()] as f64;
                        (l.clone(), vec![target_encode_smoothed(n_i, sums[l.as_str()], prior, spec.smoothing)])
                    })
                    .collect();
                (mapping, vec![prior])
            }
            EncoderKind::Summary => {
                let y = y.unwrap();
                let mut global = y.to_vec();
                global.sort_by(f64::total_cmp);
                let mut per_level: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
                for (v, &t) in x.iter().zip(y) {
                    per_level.entry(v.as_str()).or_default().push(t);
                }
                let global_q: Vec<f64> = spec.quantiles.iter().map(|&p| quantile(&global, p)).collect();
                let mapping = per_level
                    .into_iter()
                    .map(|(l, mut vals)| {
                        vals.sort_by(f64::total_cmp);
                        let n_i = vals.len() as f64;
                        let row = spec
                            .quantiles
                            .iter()
                            .zip(&global_q)
                            .map(|(&p, &g)| summary_encode(quantile(&vals, p), n_i, g, spec.quantile_weight))
                            .collect();
                        (l.to_string(), row)
                    })
                    .collect();
                (mapping, global_q)
            }
            EncoderKind::StringSimilarity => {
                let mut fitted = FittedEncoder {
                    spec: spec.clone(),
                    column: column.to_string(),
                    vocabulary: vocabulary.clone(),
                    mapping: BTreeMap::new(),
                    unknown: Vec::new(),
                    output_arity: k,
                };
                let mapping = vocabulary.iter().map(|l| (l.clone(), fitted.similarities(l))).collect();
                fitted.mapping = mapping;
                return Ok(fitted);
            }
        };
        let fitted = FittedEncoder {
            spec: spec.clone(),
            column: column.to_string(),
            output_arity: unknown.len(),
            vocabulary,
            mapping,
            unknown,
        };
        if matches!(spec.kind, EncoderKind::Target | EncoderKind::Summary | EncoderKind::Frequency) {
            fitted.log_collisions();
        }
        Ok(fitted)
    }

    fn similarities(&self, value: &str) -> Vec<f64> {
        let sim = if self.spec.winkler { jaro_winkler_similarity } else { jaro_similarity };
        self.vocabulary.iter().map(|l| sim(value, l)).collect()
    }

    fn log_collisions(&self) {
        let mut seen: BTreeMap<Vec<u64>, &str> = BTreeMap::new();
        for (level, row) in &self.mapping {
            let key = row.iter().map(|v| v.to_bits()).collect();
            if let Some(other) = seen.insert(key, level) {
                log::info!("{} encoder on {}: levels {other:?} and {level:?} share an encoding", self.spec.kind, self.column);
            }
        }
    }

    /// Output row for one cell; total over all strings.
    pub fn encode(&self, value: &str) -> Vec<f64> {
        match self.mapping.get(value) {
            Some(row) => row.clone(),
            None if self.spec.kind == EncoderKind::StringSimilarity => self.similarities(value),
            None => self.unknown.clone(),
        }
    }

    /// Column-major output block: `output_arity` columns of `x.len()` values.
    pub fn transform(&self, x: &[String]) -> Vec<Vec<f64>> {
        let mut block = vec![Vec::with_capacity(x.len()); self.output_arity];
        for v in x {
            for (col, val) in block.iter_mut().zip(self.encode(v)) {
                col.push(val);
            }
        }
        block
    }

    /// Level whose row equals `row` exactly, if exactly one does.
    pub fn inverse(&self, row: &[f64]) -> Option<&str> {
        let mut hits = self.mapping.iter().filter(|(_, r)| r.as_slice() == row);
        let first = hits.next()?;
        hits.next().is_none().then_some(first.0.as_str())
    }

    /// Output column names: the source name for single columns, else
    /// `name_j`.
    pub fn output_names(&self) -> Vec<String> {
        if self.output_arity == 1 {
            vec![self.column.clone()]
        } else {
            (0..self.output_arity).map(|j| format!("{}_{j}", self.column)).collect()
        }
    }
}
