use tabenc_nn::{Dense, Embedding, MlpBlock, Module, Parameter, Rng, Scalar, Sigmoid, Tensor};

use super::{embedding_dim, gather, ModelConfig, Network};

/// One embedding per input column, concatenated and fed through shrinking
/// MLP blocks to a sigmoid head.
#[derive(Clone, Debug)]
pub struct EntityModel<F> {
    pub embeddings: Vec<Embedding<F>>,
    pub blocks: Vec<MlpBlock<F>>,
    pub head: Dense<F>,
    sigmoid: Sigmoid<F>,
}

/// MLP widths for a concatenated width `d`: `max(1, floor(f * d))` per fraction.
pub fn mlp_widths(d: usize, fractions: &[f64]) -> Vec<usize> {
    fractions.iter().map(|f| ((f * d as f64).floor() as usize).max(1)).collect()
}

impl<F: Scalar> EntityModel<F> {
    /// `vocab_sizes[j]` distinct values in column `j`; its table gets one
    /// extra row for the unknown index 0.
    pub fn new(vocab_sizes: &[usize], outputs: usize, config: &ModelConfig, rng: &mut Rng) -> Self {
        let embeddings: Vec<Embedding<F>> = vocab_sizes
            .iter()
            .enumerate()
            .map(|(j, &c)| Embedding::new(&format!("embedding{j}"), c + 1, embedding_dim(c), rng))
            .collect();
        let mut width = embeddings.iter().map(|e| e.dim()).sum();
        let mut blocks = Vec::new();
        for (i, w) in mlp_widths(width, &config.mlp_fractions).into_iter().enumerate() {
            blocks.push(MlpBlock::new(&format!("mlp{i}"), width, w, config.dropout, config.norm_eps, rng));
            width = w;
        }
        EntityModel {
            embeddings,
            blocks,
            head: Dense::new("head", width, outputs, rng),
            sigmoid: Sigmoid::new(),
        }
    }

    pub fn concat_width(&self) -> usize {
        self.embeddings.iter().map(|e| e.dim()).sum()
    }
}

impl<F: Scalar> Module<F> for EntityModel<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        let mut p: Vec<&Parameter<F>> = self.embeddings.iter().flat_map(|e| e.params()).collect();
        p.extend(self.blocks.iter().flat_map(|b| b.params()));
        p.extend(self.head.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        let mut p: Vec<&mut Parameter<F>> = self.embeddings.iter_mut().flat_map(|e| e.params_mut()).collect();
        p.extend(self.blocks.iter_mut().flat_map(|b| b.params_mut()));
        p.extend(self.head.params_mut());
        p
    }
}

impl<F: Scalar> Network<F> for EntityModel<F> {
    fn forward(&mut self, rows: &[Vec<usize>], train: bool, rng: &mut Rng) -> Tensor<F> {
        let parts: Vec<Tensor<F>> = self
            .embeddings
            .iter_mut()
            .enumerate()
            .map(|(j, e)| e.forward(&gather(rows, j)))
            .collect();
        let mut h = Tensor::concat_cols(&parts.iter().collect::<Vec<_>>());
        for b in &mut self.blocks {
            h = b.forward(&h, train, rng);
        }
        let logits = self.head.forward(&h);
        self.sigmoid.forward(&logits)
    }

    fn backward(&mut self, dp: &Tensor<F>) {
        let mut g = self.head.backward(&self.sigmoid.backward(dp));
        for b in self.blocks.iter_mut().rev() {
            g = b.backward(&g);
        }
        let widths: Vec<usize> = self.embeddings.iter().map(|e| e.dim()).collect();
        for (e, part) in self.embeddings.iter_mut().zip(g.split_cols(&widths)) {
            e.backward(&part);
        }
    }
}
