use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::SimformerConfig;
use crate::error::{Error, Result};
use crate::numeric::{
    ffn_backward, ffn_forward, layer_norm_backward, layer_norm_forward, mhsa_backward, mhsa_forward, FfnCache,
    FfnParams, LayerNormCache, LayerNormParams, Mask, Matrix, MhsaCache, MhsaParams, ParamTensor, Parameterized,
    LAYER_NORM_EPS,
};
use crate::scalar::Scalar;
use crate::trajectory::Point;

/// Non-negative trajectory embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation<T = f64>(pub Vec<T>);

impl<T> Representation<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// One post-norm transformer block: `x ← LN1(x + MHSA(x))`,
/// `x ← LN2(x + FFN(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer<T = f64> {
    pub attn: MhsaParams<T>,
    pub ln1: LayerNormParams<T>,
    pub ffn: FfnParams<T>,
    pub ln2: LayerNormParams<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimformerModel<T = f64> {
    pub config: SimformerConfig,
    /// `d × 2` point embedding weights.
    pub embed_w: ParamTensor<T>,
    /// `1 × d` point embedding bias.
    pub embed_b: ParamTensor<T>,
    /// `max_len × d` learnable positional table.
    pub pos: ParamTensor<T>,
    pub layers: Vec<EncoderLayer<T>>,
}

struct LayerCache<T> {
    attn: MhsaCache<T>,
    ln1: LayerNormCache<T>,
    ffn: FfnCache<T>,
    ln2: LayerNormCache<T>,
}

/// Intermediate values of one forward pass, consumed by
/// [`SimformerModel::backward`].
pub struct EncodeCache<T = f64> {
    points: Vec<Point<T>>,
    padded_len: usize,
    layers: Vec<LayerCache<T>>,
    pooled: Vec<T>,
}

impl<T: Scalar> EncodeCache<T> {
    /// Open/closed state of every ReLU on the real rows: feed-forward
    /// hidden units layer by layer, then the output activation.
    pub fn relu_gates(&self) -> Vec<bool> {
        let n = self.points.len();
        let mut gates = Vec::new();
        for l in &self.layers {
            for i in 0..n {
                gates.extend(l.ffn.pre.row(i).iter().map(|&p| p > T::zero()));
            }
        }
        gates.extend(self.pooled.iter().map(|&p| p > T::zero()));
        gates
    }
}

fn glorot<T: Scalar>(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| T::of(rng.random_range(-limit..limit)))
}

impl<T: Scalar> SimformerModel<T> {
    /// Glorot-uniform weights, zero biases, unit layer-norm gains and a
    /// Gaussian(0, 0.02²) positional table, all drawn from `seed`.
    pub fn init(config: SimformerConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let SimformerConfig { d, d_ff, max_len, .. } = config;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embed_w = ParamTensor::new(glorot(d, 2, 2, d, &mut rng));
        let embed_b = ParamTensor::zeros(1, d);
        let normal = Normal::new(0.0, 0.02).expect("positive std");
        let pos = ParamTensor::new(Matrix::from_fn(max_len, d, |_, _| T::of(normal.sample(&mut rng))));
        let layers = (0..config.layers)
            .map(|_| {
                let mut attn = MhsaParams::zeros(d);
                attn.wq.value = glorot(d, d, d, d, &mut rng);
                attn.wk.value = glorot(d, d, d, d, &mut rng);
                attn.wv.value = glorot(d, d, d, d, &mut rng);
                attn.wo.value = glorot(d, d, d, d, &mut rng);
                let mut ffn = FfnParams::zeros(d, d_ff);
                ffn.w1.value = glorot(d, d_ff, d, d_ff, &mut rng);
                ffn.w2.value = glorot(d_ff, d, d_ff, d, &mut rng);
                EncoderLayer {
                    attn,
                    ln1: LayerNormParams::new(d),
                    ffn,
                    ln2: LayerNormParams::new(d),
                }
            })
            .collect();
        Ok(SimformerModel {
            config,
            embed_w,
            embed_b,
            pos,
            layers,
        })
    }

    pub fn d(&self) -> usize {
        self.config.d
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::arg("cannot encode an empty trajectory"));
        }
        if n > self.config.max_len {
            return Err(Error::Length {
                len: n,
                max: self.config.max_len,
            });
        }
        Ok(())
    }

    /// `H[i] = W·l_i + b + pos[i]` for real points, zero rows for padding.
    fn embed(&self, points: &[Point<T>], padded_len: usize) -> Matrix<T> {
        let d = self.d();
        let w = &self.embed_w.value;
        let b = self.embed_b.value.as_slice();
        let mut h = Matrix::zeros(padded_len, d);
        for (i, p) in points.iter().enumerate() {
            let pos = self.pos.value.row(i);
            let row = h.row_mut(i);
            for k in 0..d {
                row[k] = w.get(k, 0) * p.lon + w.get(k, 1) * p.lat + b[k] + pos[k];
            }
        }
        h
    }

    /// Forward pass over `points`, optionally padded with masked rows to
    /// `padded_len`. Returns the representation and the backward cache.
    pub fn forward(&self, points: &[Point<T>], padded_len: Option<usize>) -> Result<(Representation<T>, EncodeCache<T>)> {
        let n = points.len();
        self.check_len(n)?;
        let len = padded_len.unwrap_or(n).max(n);
        let mask = (len > n).then(|| Mask::key_padding(len, len, n));
        let eps = T::of(LAYER_NORM_EPS);
        let mut x = self.embed(points, len);
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (a, attn) = mhsa_forward(&x, &layer.attn, self.config.heads, mask.as_ref())?;
            let r1 = x.add(&a)?;
            let (x1, ln1) = layer_norm_forward(&r1, layer.ln1.gain.value.as_slice(), layer.ln1.bias.value.as_slice(), eps)?;
            let (f, ffn) = ffn_forward(&x1, &layer.ffn)?;
            let r2 = x1.add(&f)?;
            let (x2, ln2) = layer_norm_forward(&r2, layer.ln2.gain.value.as_slice(), layer.ln2.bias.value.as_slice(), eps)?;
            caches.push(LayerCache { attn, ln1, ffn, ln2 });
            x = x2;
        }
        let d = self.d();
        let mut pooled = vec![T::zero(); d];
        for i in 0..n {
            for (p, v) in pooled.iter_mut().zip(x.row(i)) {
                *p += *v;
            }
        }
        let inv_n = T::of(n as f64);
        for p in &mut pooled {
            *p /= inv_n;
        }
        if pooled.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric {
                step: 0,
                msg: "non-finite representation".into(),
            });
        }
        let v: Vec<T> = pooled.iter().map(|&p| if p > T::zero() { p } else { T::zero() }).collect();
        Ok((
            Representation(v),
            EncodeCache {
                points: points.to_vec(),
                padded_len: len,
                layers: caches,
                pooled,
            },
        ))
    }

    /// Accumulates parameter gradients for `d loss / d v = grad_v`.
    pub fn backward(&mut self, cache: &EncodeCache<T>, grad_v: &[T]) {
        let d = self.d();
        let n = cache.points.len();
        let inv_n = T::one() / T::of(n as f64);
        let mut dx = Matrix::zeros(cache.padded_len, d);
        for i in 0..n {
            let row = dx.row_mut(i);
            for k in 0..d {
                row[k] = if cache.pooled[k] > T::zero() {
                    grad_v[k] * inv_n
                } else {
                    T::zero()
                };
            }
        }
        for (layer, lc) in self.layers.iter_mut().zip(&cache.layers).rev() {
            let dr2 = layer_norm_backward(&dx, &lc.ln2, &mut layer.ln2);
            let mut dx1 = ffn_backward(&dr2, &lc.ffn, &mut layer.ffn);
            dx1.add_assign(&dr2).expect("same shape");
            let dr1 = layer_norm_backward(&dx1, &lc.ln1, &mut layer.ln1);
            let mut dh = mhsa_backward(&dr1, &lc.attn, &mut layer.attn);
            dh.add_assign(&dr1).expect("same shape");
            dx = dh;
        }
        let dw = self.embed_w.grad.as_mut_slice();
        let db = self.embed_b.grad.as_mut_slice();
        for (i, p) in cache.points.iter().enumerate() {
            let g = dx.row(i);
            let dpos = self.pos.grad.row_mut(i);
            for k in 0..d {
                dpos[k] += g[k];
                dw[2 * k] += g[k] * p.lon;
                dw[2 * k + 1] += g[k] * p.lat;
                db[k] += g[k];
            }
        }
    }

    /// Encodes one trajectory.
    pub fn encode(&self, points: &[Point<T>]) -> Result<Representation<T>> {
        self.forward(points, None).map(|(v, _)| v)
    }

    /// Encodes a batch, padding to the longest member and masking the pad
    /// keys. Bit-identical to calling [`Self::encode`] on each member.
    pub fn encode_batch<P: AsRef<[Point<T>]>>(&self, trajs: &[P]) -> Result<Vec<Representation<T>>> {
        let len = trajs.iter().map(|t| t.as_ref().len()).max().unwrap_or(0);
        trajs
            .iter()
            .map(|t| self.forward(t.as_ref(), Some(len)).map(|(v, _)| v))
            .collect()
    }

    /// Attention mass received by each point: the softmax weights averaged
    /// over layers, heads and query positions. Sums to 1.
    pub fn export_attention(&self, points: &[Point<T>]) -> Result<Vec<f64>> {
        let (_, cache) = self.forward(points, None)?;
        let n = points.len();
        let mut mass = vec![0.0; n];
        let mut count = 0usize;
        for lc in &cache.layers {
            for a in &lc.attn.attn {
                for i in 0..n {
                    for (m, w) in mass.iter_mut().zip(a.row(i)) {
                        *m += w.as_f64();
                    }
                    count += 1;
                }
            }
        }
        for m in &mut mass {
            *m /= count as f64;
        }
        Ok(mass)
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SimformerModel<U> {
        let mut out = SimformerModel::<U>::init(self.config, 0).expect("config already validated");
        for (dst, src) in out.params_mut().into_iter().zip(self.params()) {
            for (x, y) in dst.value.as_mut_slice().iter_mut().zip(src.value.as_slice()) {
                *x = U::of(y.as_f64());
            }
        }
        out
    }
}

impl<T: Scalar> Parameterized<T> for SimformerModel<T> {
    /// Fixed order: embedding W, b, positional table, then per layer
    /// Wq, bq, Wk, bk, Wv, bv, Wo, bo, LN1 gain, LN1 bias, W1, b1, W2, b2,
    /// LN2 gain, LN2 bias.
    fn params(&self) -> Vec<&ParamTensor<T>> {
        let mut v = vec![&self.embed_w, &self.embed_b, &self.pos];
        for l in &self.layers {
            v.extend(l.attn.tensors());
            v.extend([&l.ln1.gain, &l.ln1.bias]);
            v.extend(l.ffn.tensors());
            v.extend([&l.ln2.gain, &l.ln2.bias]);
        }
        v
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor<T>> {
        let mut v = vec![&mut self.embed_w, &mut self.embed_b, &mut self.pos];
        for l in &mut self.layers {
            v.extend(l.attn.tensors_mut());
            v.extend([&mut l.ln1.gain, &mut l.ln1.bias]);
            v.extend(l.ffn.tensors_mut());
            v.extend([&mut l.ln2.gain, &mut l.ln2.bias]);
        }
        v
    }
}
