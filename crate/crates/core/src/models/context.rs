use tabenc_nn::{Dense, Embedding, LayerNorm, MlpBlock, Module, MultiHeadAttention, Parameter, Rng, Scalar, Sigmoid, Tensor};

use super::{gather, ModelConfig, Network};

/// Self-attention over columns, then a width-preserving MLP, each wrapped in
/// a residual connection and layer norm.
#[derive(Clone, Debug)]
pub struct EncoderBlock<F> {
    pub attention: MultiHeadAttention<F>,
    pub norm1: LayerNorm<F>,
    pub feed_forward: MlpBlock<F>,
    pub norm2: LayerNorm<F>,
}

impl<F: Scalar> EncoderBlock<F> {
    fn new(name: &str, config: &ModelConfig, rng: &mut Rng) -> Self {
        let d = config.dim;
        EncoderBlock {
            attention: MultiHeadAttention::new(&format!("{name}.attention"), d, config.heads, config.dropout, rng),
            norm1: LayerNorm::new(&format!("{name}.norm1"), d, config.norm_eps),
            feed_forward: MlpBlock::new(&format!("{name}.ff"), d, d, config.dropout, config.norm_eps, rng),
            norm2: LayerNorm::new(&format!("{name}.norm2"), d, config.norm_eps),
        }
    }

    fn forward(&mut self, x: &Tensor<F>, train: bool, rng: &mut Rng) -> Tensor<F> {
        let a = self.attention.forward(x, train, rng);
        let h = self.norm1.forward(&x.add(&a));
        let f = self.feed_forward.forward(&h, train, rng);
        self.norm2.forward(&h.add(&f))
    }

    fn backward(&mut self, dy: &Tensor<F>) -> Tensor<F> {
        let g = self.norm2.backward(dy);
        let gh = g.add(&self.feed_forward.backward(&g));
        let g = self.norm1.backward(&gh);
        g.add(&self.attention.backward(&g))
    }
}

impl<F: Scalar> Module<F> for EncoderBlock<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        let mut p = self.attention.params();
        p.extend(self.norm1.params());
        p.extend(self.feed_forward.params());
        p.extend(self.norm2.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        let mut p = self.attention.params_mut();
        p.extend(self.norm1.params_mut());
        p.extend(self.feed_forward.params_mut());
        p.extend(self.norm2.params_mut());
        p
    }
}

/// Column embeddings of a shared width stacked into a `[batch, columns, dim]`
/// sequence, passed through encoder blocks, flattened, then an MLP block and
/// a sigmoid head.
#[derive(Clone, Debug)]
pub struct ContextModel<F> {
    pub embeddings: Vec<Embedding<F>>,
    pub encoders: Vec<EncoderBlock<F>>,
    pub mlp: MlpBlock<F>,
    pub head: Dense<F>,
    sigmoid: Sigmoid<F>,
    dim: usize,
}

impl<F: Scalar> ContextModel<F> {
    pub fn new(vocab_sizes: &[usize], outputs: usize, config: &ModelConfig, rng: &mut Rng) -> Self {
        let d = config.dim;
        let embeddings = vocab_sizes
            .iter()
            .enumerate()
            .map(|(j, &c)| Embedding::new(&format!("embedding{j}"), c + 1, d, rng))
            .collect();
        let encoders = (0..config.encoder_blocks)
            .map(|i| EncoderBlock::new(&format!("encoder{i}"), config, rng))
            .collect();
        let flat = vocab_sizes.len() * d;
        ContextModel {
            embeddings,
            encoders,
            mlp: MlpBlock::new("mlp0", flat, flat, config.dropout, config.norm_eps, rng),
            head: Dense::new("head", flat, outputs, rng),
            sigmoid: Sigmoid::new(),
            dim: d,
        }
    }

    pub fn sequence_len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn flat_width(&self) -> usize {
        self.embeddings.len() * self.dim
    }
}

impl<F: Scalar> Module<F> for ContextModel<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        let mut p: Vec<&Parameter<F>> = self.embeddings.iter().flat_map(|e| e.params()).collect();
        p.extend(self.encoders.iter().flat_map(|b| b.params()));
        p.extend(self.mlp.params());
        p.extend(self.head.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        let mut p: Vec<&mut Parameter<F>> = self.embeddings.iter_mut().flat_map(|e| e.params_mut()).collect();
        p.extend(self.encoders.iter_mut().flat_map(|b| b.params_mut()));
        p.extend(self.mlp.params_mut());
        p.extend(self.head.params_mut());
        p
    }
}

impl<F: Scalar> Network<F> for ContextModel<F> {
    fn forward(&mut self, rows: &[Vec<usize>], train: bool, rng: &mut Rng) -> Tensor<F> {
        let (b, l, d) = (rows.len(), self.embeddings.len(), self.dim);
        // concatenating [b, d] column blocks gives row-major [b, l, d]
        let parts: Vec<Tensor<F>> = self
            .embeddings
            .iter_mut()
            .enumerate()
            .map(|(j, e)| e.forward(&gather(rows, j)))
            .collect();
        let mut h = Tensor::concat_cols(&parts.iter().collect::<Vec<_>>()).reshape(&[b, l, d]);
        for enc in &mut self.encoders {
            h = enc.forward(&h, train, rng);
        }
        let h = self.mlp.forward(&h.reshape(&[b, l * d]), train, rng);
        let logits = self.head.forward(&h);
        self.sigmoid.forward(&logits)
    }

    fn backward(&mut self, dp: &Tensor<F>) {
        let (l, d) = (self.embeddings.len(), self.dim);
        let g = self.mlp.backward(&self.head.backward(&self.sigmoid.backward(dp)));
        let b = g.rows();
        let mut g = g.reshape(&[b, l, d]);
        for enc in self.encoders.iter_mut().rev() {
            g = enc.backward(&g);
        }
        let parts = g.reshape(&[b, l * d]).split_cols(&vec![d; l]);
        for (e, part) in self.embeddings.iter_mut().zip(parts) {
            e.backward(&part);
        }
    }
}
