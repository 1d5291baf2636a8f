use crate::{Rng, Scalar, Tensor};

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)` at train time,
/// the layer is the identity at eval time.
#[derive(Clone, Debug)]
pub struct Dropout<F> {
    pub rate: f64,
    mask: Option<Vec<F>>,
}

impl<F: Scalar> Dropout<F> {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
        Dropout { rate, mask: None }
    }

    pub fn forward(&mut self, x: &Tensor<F>, train: bool, rng: &mut Rng) -> Tensor<F> {
        if !train || self.rate == 0.0 {
            self.mask = None;
            return x.clone();
        }
        let keep = F::lit(1.0 / (1.0 - self.rate));
        let mask: Vec<F> = (0..x.len())
            .map(|_| if rng.uniform() < self.rate { F::zero() } else { keep })
            .collect();
        let data = x.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        self.mask = Some(mask);
        Tensor::from_vec(x.shape(), data)
    }

    pub fn backward(&self, dy: &Tensor<F>) -> Tensor<F> {
        match &self.mask {
            None => dy.clone(),
            Some(mask) => {
                let data = dy.data().iter().zip(mask).map(|(&g, &m)| g * m).collect();
                Tensor::from_vec(dy.shape(), data)
            }
        }
    }
}
