use crate::{Module, Parameter, Rng, Scalar, Tensor};

/// Affine map `y = x W + b` over the last axis.
#[derive(Clone, Debug)]
pub struct Dense<F> {
    pub weight: Parameter<F>,
    pub bias: Parameter<F>,
    input: Option<Tensor<F>>,
}

impl<F: Scalar> Dense<F> {
    /// Glorot-uniform weights, zero bias.
    pub fn new(name: &str, inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let w: Vec<f64> = (0..inputs * outputs)
            .map(|_| rng.uniform_range(-limit, limit))
            .collect();
        Dense {
            weight: Parameter::new(format!("{name}.weight"), Tensor::from_f64(&[inputs, outputs], &w)),
            bias: Parameter::new(format!("{name}.bias"), Tensor::zeros(&[outputs])),
            input: None,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn forward(&mut self, x: &Tensor<F>) -> Tensor<F> {
        let y = self.apply(x);
        self.input = Some(x.clone());
        y
    }

    /// Forward pass without caching for backward.
    pub fn apply(&self, x: &Tensor<F>) -> Tensor<F> {
        let (i, o) = (self.inputs(), self.outputs());
        assert_eq!(x.cols(), i, "dense {}: expected {i} inputs, got {}", self.weight.name, x.cols());
        let rows = x.rows();
        let mut out = Vec::with_capacity(rows * o);
        for _ in 0..rows {
            out.extend_from_slice(self.bias.value.data());
        }
        F::gemm(false, false, rows, o, i, F::one(), x.data(), self.weight.value.data(), F::one(), &mut out);
        let mut shape = x.shape().to_vec();
        *shape.last_mut().unwrap() = o;
        let y = Tensor::from_vec(&shape, out);
        debug_assert!(y.is_finite(), "dense {} produced non-finite values", self.weight.name);
        y
    }

    pub fn backward(&mut self, dy: &Tensor<F>) -> Tensor<F> {
        let x = self.input.as_ref().expect("dense backward before forward");
        let (i, o) = (self.inputs(), self.outputs());
        let rows = x.rows();
        assert_eq!(dy.len(), rows * o, "dense backward: gradient shape mismatch");
        // dW += x^T dy
        F::gemm(true, false, i, o, rows, F::one(), x.data(), dy.data(), F::one(), self.weight.grad.data_mut());
        let db = self.bias.grad.data_mut();
        for r in 0..rows {
            for (g, &d) in db.iter_mut().zip(&dy.data()[r * o..(r + 1) * o]) {
                *g += d;
            }
        }
        // dx = dy W^T
        let mut dx = Tensor::zeros(x.shape());
        F::gemm(false, true, rows, i, o, F::one(), dy.data(), self.weight.value.data(), F::zero(), dx.data_mut());
        dx
    }
}

impl<F: Scalar> Module<F> for Dense<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        vec![&mut self.weight, &mut self.bias]
    }
}
