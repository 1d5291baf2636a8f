use crate::{Dense, Module, Parameter, Rng, Scalar, Tensor};

/// Multi-head scaled dot-product self-attention over a `[batch, len, dim]`
/// sequence.
///
/// The model width does not have to divide evenly by the head count: each
/// head gets `ceil(dim / heads)` channels and the concatenated heads are
/// projected back to `dim`. Dropout is applied to the attention weights.
#[derive(Clone, Debug)]
pub struct MultiHeadAttention<F> {
    pub query: Dense<F>,
    pub key: Dense<F>,
    pub value: Dense<F>,
    pub output: Dense<F>,
    heads: usize,
    head_dim: usize,
    dropout: f64,
    cache: Option<AttentionCache<F>>,
}

#[derive(Clone, Debug)]
struct AttentionCache<F> {
    batch: usize,
    len: usize,
    q: Tensor<F>,
    k: Tensor<F>,
    v: Tensor<F>,
    /// softmax weights, `[batch, heads, len, len]`
    weights: Vec<F>,
    /// dropout multipliers on `weights`, same layout; `None` at eval time
    mask: Option<Vec<F>>,
}

impl<F: Scalar> MultiHeadAttention<F> {
    pub fn new(name: &str, dim: usize, heads: usize, dropout: f64, rng: &mut Rng) -> Self {
        assert!(heads > 0 && dim > 0, "attention needs positive width and head count");
        let head_dim = dim.div_ceil(heads);
        let inner = heads * head_dim;
        MultiHeadAttention {
            query: Dense::new(&format!("{name}.query"), dim, inner, rng),
            key: Dense::new(&format!("{name}.key"), dim, inner, rng),
            value: Dense::new(&format!("{name}.value"), dim, inner, rng),
            output: Dense::new(&format!("{name}.output"), inner, dim, rng),
            heads,
            head_dim,
            dropout,
            cache: None,
        }
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn head_dim(&self) -> usize {
        self.head_dim
    }

    /// Attention weights of the last forward pass, `[batch, heads, len, len]`.
    pub fn last_weights(&self) -> Option<Tensor<F>> {
        self.cache.as_ref().map(|c| {
            Tensor::from_vec(&[c.batch, self.heads, c.len, c.len], c.weights.clone())
        })
    }

    pub fn forward(&mut self, x: &Tensor<F>, train: bool, rng: &mut Rng) -> Tensor<F> {
        let shape = x.shape().to_vec();
        assert_eq!(shape.len(), 3, "attention expects [batch, len, dim]");
        let (batch, len) = (shape[0], shape[1]);
        assert!(len > 0, "attention over an empty sequence");
        let q = self.query.forward(x);
        let k = self.key.forward(x);
        let v = self.value.forward(x);
        let (h, dh) = (self.heads, self.head_dim);
        let inner = h * dh;
        let scale = F::lit(1.0 / (dh as f64).sqrt());
        let mut weights = vec![F::zero(); batch * h * len * len];
        let use_dropout = train && self.dropout > 0.0;
        let mut mask = if use_dropout { Some(vec![F::zero(); weights.len()]) } else { None };
        let keep = F::lit(1.0 / (1.0 - self.dropout));
        let mut heads_out = vec![F::zero(); batch * len * inner];

        for b in 0..batch {
            for head in 0..h {
                let base = ((b * h) + head) * len * len;
                for i in 0..len {
                    let qi = &q.data()[(b * len + i) * inner + head * dh..][..dh];
                    let row = &mut weights[base + i * len..base + (i + 1) * len];
                    let mut max = F::neg_infinity();
                    for (j, s) in row.iter_mut().enumerate() {
                        let kj = &k.data()[(b * len + j) * inner + head * dh..][..dh];
                        let dot: F = qi.iter().zip(kj).map(|(&a, &c)| a * c).sum();
                        *s = dot * scale;
                        if *s > max {
                            max = *s;
                        }
                    }
                    let mut total = F::zero();
                    for s in row.iter_mut() {
                        *s = (*s - max).exp();
                        total += *s;
                    }
                    for s in row.iter_mut() {
                        *s /= total;
                    }
                    if let Some(m) = mask.as_mut() {
                        for mj in &mut m[base + i * len..base + (i + 1) * len] {
                            *mj = if rng.uniform() < self.dropout { F::zero() } else { keep };
                        }
                    }
                    let out = &mut heads_out[(b * len + i) * inner + head * dh..][..dh];
                    for j in 0..len {
                        let mut w = weights[base + i * len + j];
                        if let Some(m) = mask.as_ref() {
                            w *= m[base + i * len + j];
                        }
                        let vj = &v.data()[(b * len + j) * inner + head * dh..][..dh];
                        for (o, &vv) in out.iter_mut().zip(vj) {
                            *o += w * vv;
                        }
                    }
                }
            }
        }
        let concat = Tensor::from_vec(&[batch, len, inner], heads_out);
        let y = self.output.forward(&concat);
        self.cache = Some(AttentionCache {
            batch,
            len,
            q,
            k,
            v,
            weights,
            mask,
        });
        debug_assert!(y.is_finite(), "attention produced non-finite values");
        y
    }

    pub fn backward(&mut self, dy: &Tensor<F>) -> Tensor<F> {
        let d_concat = self.output.backward(dy);
        let cache = self.cache.as_ref().expect("attention backward before forward");
        let (batch, len) = (cache.batch, cache.len);
        let (h, dh) = (self.heads, self.head_dim);
        let inner = h * dh;
        let scale = F::lit(1.0 / (dh as f64).sqrt());
        let mut dq = Tensor::zeros(cache.q.shape());
        let mut dk = Tensor::zeros(cache.k.shape());
        let mut dv = Tensor::zeros(cache.v.shape());
        let mut dw = vec![F::zero(); len];
        let mut ds = vec![F::zero(); len];

        for b in 0..batch {
            for head in 0..h {
                let base = ((b * h) + head) * len * len;
                for i in 0..len {
                    let doi = &d_concat.data()[(b * len + i) * inner + head * dh..][..dh];
                    // gradient w.r.t. the (dropped) weights and the values
                    for j in 0..len {
                        let off = (b * len + j) * inner + head * dh;
                        let vj = &cache.v.data()[off..off + dh];
                        let g: F = doi.iter().zip(vj).map(|(&a, &c)| a * c).sum();
                        let m = cache.mask.as_ref().map_or(F::one(), |m| m[base + i * len + j]);
                        dw[j] = g * m;
                        let w = cache.weights[base + i * len + j] * m;
                        for (dvj, &gg) in dv.data_mut()[off..off + dh].iter_mut().zip(doi) {
                            *dvj += w * gg;
                        }
                    }
                    // softmax backward
                    let a = &cache.weights[base + i * len..base + (i + 1) * len];
                    let dot: F = a.iter().zip(&dw).map(|(&x, &y)| x * y).sum();
                    for j in 0..len {
                        ds[j] = a[j] * (dw[j] - dot) * scale;
                    }
                    let qoff = (b * len + i) * inner + head * dh;
                    for j in 0..len {
                        let koff = (b * len + j) * inner + head * dh;
                        for c in 0..dh {
                            let kq = cache.k.data()[koff + c];
                            let qv = cache.q.data()[qoff + c];
                            dq.data_mut()[qoff + c] += ds[j] * kq;
                            dk.data_mut()[koff + c] += ds[j] * qv;
                        }
                    }
                }
            }
        }
        let mut dx = self.query.backward(&dq);
        dx.add_assign(&self.key.backward(&dk));
        dx.add_assign(&self.value.backward(&dv));
        dx
    }
}

impl<F: Scalar> Module<F> for MultiHeadAttention<F> {
    fn params(&self) -> Vec<&Parameter<F>> {
        let mut p = self.query.params();
        p.extend(self.key.params());
        p.extend(self.value.params());
        p.extend(self.output.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Parameter<F>> {
        let mut p = self.query.params_mut();
        p.extend(self.key.params_mut());
        p.extend(self.value.params_mut());
        p.extend(self.output.params_mut());
        p
    }
}
