use crate::{Module, Parameter, Scalar, Tensor};

/// Layer normalization over the last axis with learned scale and offset.
#[derive(Clone, Debug)]
pub struct LayerNorm<F> {
    pub gamma: Parameter<F>,
    pub beta: Parameter<F>,
    pub eps: f64,
    normalized: Option<Tensor<F>>,
    inv_std: Vec<F>,
}

impl<F: Scalar> LayerNorm<F> {
    pub fn new(name: &str, dim: usize, eps: f64) -> Self {
        LayerNorm {
            gamma: Parameter::new(format!("{name}.gamma"), Tensor::full(&[dim], F::one())),
            beta: Parameter::new(format!("{name}.beta"), Tensor::zeros(&[dim])),
            eps,
            normalized: None,
            inv_std: Vec::new(),
        }
    }

    pub fn forward(&mut self, x: &Tensor<F>) -> Tensor<F> {
        let d = self.gamma.value.len();
        assert_eq!(x.cols(), d, "layer norm {}: width mismatch", self.gamma.name);
        let rows = x.rows();
        let dn = F::lit(d as f64);
        let eps = F::lit(self.eps);
        let mut xhat = Tensor::zeros(x.shape());
        let mut y = Tensor::zeros(x.shape());
        self.inv_std.clear();
        for r in 0..rows {
            let row = x.row(r);
            let mean = row.iter().copied().sum::<F>() / dn;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / dn;
            let inv = F::one() / (var + eps).sqrt();
            self.inv_std.push(inv);
            let xh = xhat.row_mut(r);
            for (o, &v) in xh.iter_mut().zip(row) {
                *o = (v - mean) * inv;
            }
            let g = self.gamma.value.data();
            let b = self.beta.value.data();
            for (j, o) in y.row_mut(r).iter_mut().enumerate() {
                *o = g[j] * xhat.at(r, j) + b[j];
            }
        }
        self.normalized = Some(xhat);
        debug_assert!(y.is_finite(), "layer norm produced non-finite values");
        y
    }

    pub fn backward(&mut self, dy: &Tensor<F>) -> Tensor<F> {
        let xhat = self.normalized.as_ref().expect("layer norm backward before forward");
        let d = self.gamma.value.len();
        let dn = F::lit(d as f64);
        let rows = xhat.rows();
        let mut dx = Tensor::zeros(xhat.shape());
        let mut dxhat = vec![F::zero(); d];
        for r in 0..rows {
            let g = dy.row(r);
            let xh = xhat.row(r);
            {
                let gg = self.gamma.grad.data_mut();
                for j in 0..d {
                    gg[j] += g[j] * xh[j];
                }
            }
            {
                let bg = self.beta.grad.data_mut();
                for j in 0..d {
                    bg[j] += g[j];
                }
            }
            let gamma = self.gamma.value.data();
            for j in 0..d {
                dxhat[j] = g[j] * gamma[j];
            }
            let sum_dxhat: F = dxhat.iter().copied().sum();
            let sum_dxhat_xhat: F = dxhat.iter().zip(xh).map(|(&a, &b)| a * b).sum();
            let scale = self.inv_std[r] / dn;
            for (j, o) in dx.row_mut(r).iter_mut().enumerate() {
                *o = scale * (dn * dxhat[j] - sum_dxhat - xh[j] * sum_dxhat_xhat);
            }
        }
        dx
    }
}

impl<F: Scalar> Module<F> for LayerNorm<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        vec![&self.gamma, &self.beta]
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        vec![&mut self.gamma, &mut self.beta]
    }
}
