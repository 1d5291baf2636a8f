use crate::{Module, Parameter, Rng, Scalar, Tensor};

/// Lookup table of `vocab x dim` rows. Row 0 is conventionally the unknown slot.
#[derive(Clone, Debug)]
pub struct Embedding<F> {
    pub table: Parameter<F>,
    indices: Vec<usize>,
}

impl<F: Scalar> Embedding<F> {
    /// Rows drawn from uniform(-0.05, 0.05).
    pub fn new(name: &str, vocab: usize, dim: usize, rng: &mut Rng) -> Self {
        let w: Vec<f64> = (0..vocab * dim).map(|_| rng.uniform_range(-0.05, 0.05)).collect();
        Embedding {
            table: Parameter::new(format!("{name}.table"), Tensor::from_f64(&[vocab, dim], &w)),
            indices: Vec::new(),
        }
    }

    pub fn vocab(&self) -> usize {
        self.table.value.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.table.value.shape()[1]
    }

    /// Gathers one row per index into an `n x dim` tensor.
    ///
    /// Panics on an index outside the table.
    pub fn forward(&mut self, indices: &[usize]) -> Tensor<F> {
        let y = self.apply(indices);
        self.indices = indices.to_vec();
        y
    }

    pub fn apply(&self, indices: &[usize]) -> Tensor<F> {
        let (v, d) = (self.vocab(), self.dim());
        let mut out = Vec::with_capacity(indices.len() * d);
        for &ix in indices {
            assert!(ix < v, "embedding {}: index {ix} out of range for vocab {v}", self.table.name);
            out.extend_from_slice(self.table.value.row(ix));
        }
        Tensor::from_vec(&[indices.len(), d], out)
    }

    /// Scatter-adds row gradients into the looked-up rows.
    pub fn backward(&mut self, dy: &Tensor<F>) {
        let d = self.dim();
        assert_eq!(dy.len(), self.indices.len() * d, "embedding backward: gradient shape mismatch");
        for (r, &ix) in self.indices.iter().enumerate() {
            let src = &dy.data()[r * d..(r + 1) * d];
            for (g, &s) in self.table.grad.row_mut(ix).iter_mut().zip(src) {
                *g += s;
            }
        }
    }
}

impl<F: Scalar> Module<F> for Embedding<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        vec![&self.table]
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        vec![&mut self.table]
    }
}
