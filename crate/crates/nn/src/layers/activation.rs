use crate::{Scalar, Tensor};

#[derive(Clone, Debug, Default)]
pub struct Relu {
    active: Vec<bool>,
}

impl Relu {
    pub fn new() -> Self {
        Relu::default()
    }

    pub fn forward<F: Scalar>(&mut self, x: &Tensor<F>) -> Tensor<F> {
        self.active = x.data().iter().map(|&v| v > F::zero()).collect();
        x.map(|v| if v > F::zero() { v } else { F::zero() })
    }

    pub fn backward<F: Scalar>(&self, dy: &Tensor<F>) -> Tensor<F> {
        assert_eq!(dy.len(), self.active.len(), "relu backward: shape mismatch");
        let data = dy
            .data()
            .iter()
            .zip(&self.active)
            .map(|(&g, &a)| if a { g } else { F::zero() })
            .collect();
        Tensor::from_vec(dy.shape(), data)
    }
}

pub fn sigmoid_scalar<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

#[derive(Clone, Debug)]
pub struct Sigmoid<F> {
    output: Option<Tensor<F>>,
}

impl<F: Scalar> Default for Sigmoid<F> {
    fn default() -> Self {
        Sigmoid { output: None }
    }
}

impl<F: Scalar> Sigmoid<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forward(&mut self, x: &Tensor<F>) -> Tensor<F> {
        let y = x.map(sigmoid_scalar);
        self.output = Some(y.clone());
        y
    }

    pub fn backward(&self, dy: &Tensor<F>) -> Tensor<F> {
        let s = self.output.as_ref().expect("sigmoid backward before forward");
        let data = dy
            .data()
            .iter()
            .zip(s.data())
            .map(|(&g, &p)| g * p * (F::one() - p))
            .collect();
        Tensor::from_vec(dy.shape(), data)
    }
}
