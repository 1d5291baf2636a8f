use crate::{Scalar, Tensor};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before the log.
pub const PROB_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy over every entry, and its gradient w.r.t. `p`.
///
/// Entries clamped away from the open interval get zero gradient.
pub fn bce_loss<F: Scalar>(p: &Tensor<F>, y: &Tensor<F>) -> (F, Tensor<F>) {
    assert_eq!(p.shape(), y.shape(), "bce: prediction/target shape mismatch");
    assert!(!p.is_empty(), "bce over an empty batch");
    let n = F::lit(p.len() as f64);
    let lo = F::lit(PROB_CLAMP);
    let hi = F::one() - lo;
    let mut total = F::zero();
    let mut grad = Vec::with_capacity(p.len());
    for (&pi, &yi) in p.data().iter().zip(y.data()) {
        let c = pi.max(lo).min(hi);
        total -= yi * c.ln() + (F::one() - yi) * (F::one() - c).ln();
        let g = if pi < lo || pi > hi {
            F::zero()
        } else {
            (-yi / c + (F::one() - yi) / (F::one() - c)) / n
        };
        grad.push(g);
    }
    (total / n, Tensor::from_vec(p.shape(), grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_predictions_hit_the_clamp_floor() {
        let p = Tensor::<f64>::from_f64(&[2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let (l, _) = bce_loss(&p, &p);
        assert!(l <= 1e-6, "{l}");
    }

    #[test]
    fn half_everywhere_is_ln2() {
        let p = Tensor::<f64>::full(&[3, 2], 0.5);
        let y = Tensor::<f64>::from_f64(&[3, 2], &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let (l, _) = bce_loss(&p, &y);
        assert_relative_eq!(l, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = Tensor::<f64>::from_f64(&[2, 3], &[0.1, 0.7, 0.45, 0.9, 0.3, 0.62]);
        let y = Tensor::<f64>::from_f64(&[2, 3], &[0.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        let (_, g) = bce_loss(&p, &y);
        let h = 1e-6;
        for i in 0..p.len() {
            let mut plus = p.clone();
            plus.data_mut()[i] += h;
            let mut minus = p.clone();
            minus.data_mut()[i] -= h;
            let num = (bce_loss(&plus, &y).0 - bce_loss(&minus, &y).0) / (2.0 * h);
            let rel = (num - g.data()[i]).abs() / num.abs().max(g.data()[i].abs());
            assert!(rel < 1e-4, "coordinate {i}: rel err {rel}");
        }
    }
}
