use crate::{Dense, Dropout, LayerNorm, Module, Parameter, Relu, Rng, Scalar, Tensor};

/// One MLP unit: dense, layer norm, dropout, then ReLU.
#[derive(Clone, Debug)]
pub struct MlpBlock<F> {
    pub dense: Dense<F>,
    pub norm: LayerNorm<F>,
    pub dropout: Dropout<F>,
    relu: Relu,
}

impl<F: Scalar> MlpBlock<F> {
    pub fn new(name: &str, inputs: usize, outputs: usize, dropout: f64, norm_eps: f64, rng: &mut Rng) -> Self {
        MlpBlock {
            dense: Dense::new(&format!("{name}.dense"), inputs, outputs, rng),
            norm: LayerNorm::new(&format!("{name}.norm"), outputs, norm_eps),
            dropout: Dropout::new(dropout),
            relu: Relu::new(),
        }
    }

    pub fn outputs(&self) -> usize {
        self.dense.outputs()
    }

    pub fn forward(&mut self, x: &Tensor<F>, train: bool, rng: &mut Rng) -> Tensor<F> {
        let h = self.dense.forward(x);
        let h = self.norm.forward(&h);
        let h = self.dropout.forward(&h, train, rng);
        self.relu.forward(&h)
    }

    pub fn backward(&mut self, dy: &Tensor<F>) -> Tensor<F> {
        let g = self.relu.backward(dy);
        let g = self.dropout.backward(&g);
        let g = self.norm.backward(&g);
        self.dense.backward(&g)
    }
}

impl<F: Scalar> Module<F> for MlpBlock<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        let mut p = self.dense.params();
        p.extend(self.norm.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        let mut p = self.dense.params_mut();
        p.extend(self.norm.params_mut());
        p
    }
}
