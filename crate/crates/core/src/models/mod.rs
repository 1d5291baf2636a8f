//! Entity-embedding and attention ("context") classifiers over embedding
//! indices of an [`EncodedTable`](crate::encoders::EncodedTable), with
//! seeded training and F1/BCE evaluation.

mod context;
mod entity;
mod metrics;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tabenc_nn::{Module, Parameter, Rng, Scalar, Tensor};

pub use context::{ContextModel, EncoderBlock};
pub use entity::{mlp_widths, EntityModel};
pub use metrics::{decisions, f1_score, micro_f1};
pub use train::{evaluate, train, Evaluation, TrainReport};

use crate::error::{Error, Result};

/// `ceil(1.6 * sqrt(c))`, computed exactly: the smallest `d` with
/// `25 d^2 >= 64 c`.
pub fn embedding_dim(c: usize) -> usize {
    let c = c.max(1) as u128;
    let fits = |d: u128| 25 * d * d >= 64 * c;
    let mut d = (1.6 * (c as f64).sqrt()).ceil() as u128;
    while d > 1 && fits(d - 1) {
        d -= 1;
    }
    while !fits(d) {
        d += 1;
    }
    d as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Entity,
    Context,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Entity, ModelKind::Context];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Entity => "entity",
            ModelKind::Context => "context",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub norm_eps: f64,
    /// Entity: MLP widths as fractions of the concatenated embedding width.
    pub mlp_fractions: Vec<f64>,
    /// Context: shared embedding width.
    pub dim: usize,
    pub heads: usize,
    pub encoder_blocks: usize,
}

impl ModelConfig {
    pub fn entity() -> Self {
        ModelConfig {
            kind: ModelKind::Entity,
            epochs: 10,
            batch_size: 256,
            learning_rate: 1e-3,
            dropout: 0.1,
            norm_eps: 1e-6,
            mlp_fractions: vec![0.5, 0.25],
            dim: 10,
            heads: 4,
            encoder_blocks: 1,
        }
    }

    pub fn context() -> Self {
        ModelConfig {
            kind: ModelKind::Context,
            batch_size: 128,
            ..ModelConfig::entity()
        }
    }

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Entity => ModelConfig::entity(),
            ModelKind::Context => ModelConfig::context(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epochs > 0
            && self.batch_size > 0
            && self.learning_rate >= 0.0
            && (0.0..1.0).contains(&self.dropout)
            && self.norm_eps > 0.0
            && self.dim > 0
            && self.heads > 0
            && self.mlp_fractions.iter().all(|&f| f > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid model configuration {self:?}")))
        }
    }
}

/// A classifier mapping rows of embedding indices to per-output sigmoid
/// probabilities.
pub trait Network<F: Scalar>: Module<F> {
    /// `[rows, outputs]` probabilities.
    fn forward(&mut self, rows: &[Vec<usize>], train: bool, rng: &mut Rng) -> Tensor<F>;

    /// Accumulates parameter gradients given `dL/dp` for the last forward.
    fn backward(&mut self, dp: &Tensor<F>);

    /// Eval-mode probabilities in chunks of `batch` rows.
    fn predict(&mut self, rows: &[Vec<usize>], batch: usize) -> Vec<Vec<f64>> {
        let mut rng = Rng::new(0);
        let mut out = Vec::with_capacity(rows.len());
        for chunk in rows.chunks(batch.max(1)) {
            let p = self.forward(chunk, false, &mut rng);
            let k = p.cols();
            out.extend(p.to_f64().chunks(k).map(<[f64]>::to_vec));
        }
        out
    }
}

pub(crate) fn gather(rows: &[Vec<usize>], column: usize) -> Vec<usize> {
    rows.iter().map(|r| r[column]).collect()
}

#[derive(Clone, Debug)]
pub enum Model<F> {
    Entity(EntityModel<F>),
    Context(ContextModel<F>),
}

impl<F: Scalar> Model<F> {
    /// Builds a freshly initialized network for columns with the given
    /// vocabulary sizes.
    pub fn build(config: &ModelConfig, vocab_sizes: &[usize], outputs: usize, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        if vocab_sizes.is_empty() || outputs == 0 {
            return Err(Error::Config(format!(
                "cannot build a model with {} input columns and {outputs} outputs",
                vocab_sizes.len()
            )));
        }
        Ok(match config.kind {
            ModelKind::Entity => Model::Entity(EntityModel::new(vocab_sizes, outputs, config, rng)),
            ModelKind::Context => Model::Context(ContextModel::new(vocab_sizes, outputs, config, rng)),
        })
    }
}

impl<F: Scalar> Module<F> for Model<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        match self {
            Model::Entity(m) => m.params(),
            Model::Context(m) => m.params(),
        }
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        match self {
            Model::Entity(m) => m.params_mut(),
            Model::Context(m) => m.params_mut(),
        }
    }
}

impl<F: Scalar> Network<F> for Model<F> {
    fn forward(&mut self, rows: &[Vec<usize>], train: bool, rng: &mut Rng) -> Tensor<F> {
        match self {
            Model::Entity(m) => m.forward(rows, train, rng),
            Model::Context(m) => m.forward(rows, train, rng),
        }
    }

    fn backward(&mut self, dp: &Tensor<F>) {
        match self {
            Model::Entity(m) => m.backward(dp),
            Model::Context(m) => m.backward(dp),
        }
    }
}
