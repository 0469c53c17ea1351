//! Forward and backward passes of the transformer sublayers.
//!
//! Backward functions add parameter gradients into the `grad` half of each
//! [`ParamTensor`] and return the gradient with respect to the layer input.

use super::matrix::{Mask, Matrix, ParamTensor, Parameterized};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Row-wise softmax. Hidden entries get weight 0; a row with every entry
/// hidden is an error.
pub fn softmax_rows<T: Scalar>(a: &Matrix<T>, mask: Option<&Mask>) -> Result<Matrix<T>> {
    if let Some(m) = mask {
        if m.shape() != a.shape() {
            return Err(Error::shape(format!(
                "mask {:?} for scores {:?}",
                m.shape(),
                a.shape()
            )));
        }
    }
    let mut out = a.clone();
    for i in 0..a.rows() {
        softmax_row_in_place(out.row_mut(i), |j| mask.is_some_and(|m| m.is_hidden(i, j)))
            .map_err(|_| Error::Mask(i))?;
    }
    Ok(out)
}

fn softmax_row_in_place<T: Scalar>(row: &mut [T], hidden: impl Fn(usize) -> bool) -> Result<(), ()> {
    let mut max = T::neg_infinity();
    let mut any = false;
    for (j, &x) in row.iter().enumerate() {
        if !hidden(j) {
            any = true;
            max = max.max(x);
        }
    }
    if !any {
        return Err(());
    }
    let mut sum = T::zero();
    for (j, x) in row.iter_mut().enumerate() {
        *x = if hidden(j) { T::zero() } else { (*x - max).exp() };
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams<T = f64> {
    pub gain: ParamTensor<T>,
    pub bias: ParamTensor<T>,
}

impl<T: Scalar> LayerNormParams<T> {
    pub fn new(d: usize) -> Self {
        LayerNormParams {
            gain: ParamTensor::new(Matrix::filled(1, d, T::one())),
            bias: ParamTensor::zeros(1, d),
        }
    }
}

impl<T: Scalar> Parameterized<T> for LayerNormParams<T> {
    fn params(&self) -> Vec<&ParamTensor<T>> {
        vec![&self.gain, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor<T>> {
        vec![&mut self.gain, &mut self.bias]
    }
}

#[derive(Debug, Clone)]
pub struct LayerNormCache<T = f64> {
    /// Normalized input before gain and bias.
    pub xhat: Matrix<T>,
    pub inv_std: Vec<T>,
}

/// Per row: `(x - mean) / sqrt(var + eps) * gain + bias` (population variance).
pub fn layer_norm_forward<T: Scalar>(
    x: &Matrix<T>,
    gain: &[T],
    bias: &[T],
    eps: T,
) -> Result<(Matrix<T>, LayerNormCache<T>)> {
    let d = x.cols();
    if gain.len() != d || bias.len() != d {
        return Err(Error::shape(format!(
            "layer norm over {d} features with gain {} and bias {}",
            gain.len(),
            bias.len()
        )));
    }
    let n_feat = T::of(d as f64);
    let mut xhat = Matrix::zeros(x.rows(), d);
    let mut out = Matrix::zeros(x.rows(), d);
    let mut inv_std = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = x.row(i);
        let mean = row.iter().copied().sum::<T>() / n_feat;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n_feat;
        let is = T::one() / (var + eps).sqrt();
        inv_std.push(is);
        let xh = xhat.row_mut(i);
        for (h, &v) in xh.iter_mut().zip(row) {
            *h = (v - mean) * is;
        }
        let o = out.row_mut(i);
        for k in 0..d {
            o[k] = xh[k] * gain[k] + bias[k];
        }
    }
    Ok((out, LayerNormCache { xhat, inv_std }))
}

pub fn layer_norm_backward<T: Scalar>(
    dy: &Matrix<T>,
    cache: &LayerNormCache<T>,
    params: &mut LayerNormParams<T>,
) -> Matrix<T> {
    let d = dy.cols();
    let n_feat = T::of(d as f64);
    let gain = params.gain.value.as_slice();
    let mut dx = Matrix::zeros(dy.rows(), d);
    let mut dxhat = vec![T::zero(); d];
    for i in 0..dy.rows() {
        let g = dy.row(i);
        let xh = cache.xhat.row(i);
        {
            let dgain = params.gain.grad.as_mut_slice();
            for k in 0..d {
                dgain[k] += g[k] * xh[k];
            }
        }
        {
            let dbias = params.bias.grad.as_mut_slice();
            for k in 0..d {
                dbias[k] += g[k];
            }
        }
        let mut sum = T::zero();
        let mut sum_xh = T::zero();
        for k in 0..d {
            dxhat[k] = g[k] * gain[k];
            sum += dxhat[k];
            sum_xh += dxhat[k] * xh[k];
        }
        let scale = cache.inv_std[i] / n_feat;
        let out = dx.row_mut(i);
        for k in 0..d {
            out[k] = scale * (n_feat * dxhat[k] - sum - xh[k] * sum_xh);
        }
    }
    dx
}

#[derive(Debug, Clone, PartialEq)]
pub struct MhsaParams<T = f64> {
    pub wq: ParamTensor<T>,
    pub bq: ParamTensor<T>,
    pub wk: ParamTensor<T>,
    pub bk: ParamTensor<T>,
    pub wv: ParamTensor<T>,
    pub bv: ParamTensor<T>,
    pub wo: ParamTensor<T>,
    pub bo: ParamTensor<T>,
}

impl<T: Scalar> MhsaParams<T> {
    pub fn zeros(d: usize) -> Self {
        MhsaParams {
            wq: ParamTensor::zeros(d, d),
            bq: ParamTensor::zeros(1, d),
            wk: ParamTensor::zeros(d, d),
            bk: ParamTensor::zeros(1, d),
            wv: ParamTensor::zeros(d, d),
            bv: ParamTensor::zeros(1, d),
            wo: ParamTensor::zeros(d, d),
            bo: ParamTensor::zeros(1, d),
        }
    }

    pub fn d(&self) -> usize {
        self.wq.value.rows()
    }

    pub fn tensors(&self) -> [&ParamTensor<T>; 8] {
        [&self.wq, &self.bq, &self.wk, &self.bk, &self.wv, &self.bv, &self.wo, &self.bo]
    }

    pub fn tensors_mut(&mut self) -> [&mut ParamTensor<T>; 8] {
        [
            &mut self.wq,
            &mut self.bq,
            &mut self.wk,
            &mut self.bk,
            &mut self.wv,
            &mut self.bv,
            &mut self.wo,
            &mut self.bo,
        ]
    }
}

impl<T: Scalar> Parameterized<T> for MhsaParams<T> {
    fn params(&self) -> Vec<&ParamTensor<T>> {
        self.tensors().into()
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor<T>> {
        self.tensors_mut().into()
    }
}

#[derive(Debug, Clone)]
pub struct MhsaCache<T = f64> {
    pub input: Matrix<T>,
    pub q: Matrix<T>,
    pub k: Matrix<T>,
    pub v: Matrix<T>,
    /// Softmaxed attention weights, one `n × n` matrix per head.
    pub attn: Vec<Matrix<T>>,
    /// Concatenated head outputs before the output projection.
    pub heads_out: Matrix<T>,
}

fn linear<T: Scalar>(x: &Matrix<T>, w: &ParamTensor<T>, b: &ParamTensor<T>) -> Matrix<T> {
    let mut out = Matrix::zeros(x.rows(), w.value.cols());
    x.matmul_acc(&w.value, &mut out);
    out.add_row(b.value.as_slice());
    out
}

/// Gradient of a linear map: accumulates `dW += xᵀ·dy`, `db += Σ dy` and
/// returns `dy·Wᵀ`.
fn linear_backward<T: Scalar>(
    x: &Matrix<T>,
    dy: &Matrix<T>,
    w: &mut ParamTensor<T>,
    b: &mut ParamTensor<T>,
) -> Matrix<T> {
    x.t_matmul_acc(dy, &mut w.grad);
    dy.col_sums_acc(b.grad.as_mut_slice());
    let wt = w.value.transpose();
    let mut dx = Matrix::zeros(dy.rows(), w.value.rows());
    dy.matmul_acc(&wt, &mut dx);
    dx
}

/// Multi-head self-attention with scaled dot-product scores.
pub fn mhsa_forward<T: Scalar>(
    h: &Matrix<T>,
    params: &MhsaParams<T>,
    heads: usize,
    mask: Option<&Mask>,
) -> Result<(Matrix<T>, MhsaCache<T>)> {
    let d = params.d();
    if heads == 0 || !d.is_multiple_of(heads) {
        return Err(Error::Config(format!("width {d} is not divisible by {heads} heads")));
    }
    if h.cols() != d {
        return Err(Error::shape(format!("attention input has {} columns, expected {d}", h.cols())));
    }
    let n = h.rows();
    if let Some(m) = mask {
        if m.shape() != (n, n) {
            return Err(Error::shape(format!("attention mask {:?} for {n} rows", m.shape())));
        }
    }
    let dk = d / heads;
    let scale = T::one() / T::of(dk as f64).sqrt();
    let q = linear(h, &params.wq, &params.bq);
    let k = linear(h, &params.wk, &params.bk);
    let v = linear(h, &params.wv, &params.bv);
    let mut heads_out = Matrix::zeros(n, d);
    let mut attn = Vec::with_capacity(heads);
    for hd in 0..heads {
        let off = hd * dk;
        let mut scores = Matrix::zeros(n, n);
        for i in 0..n {
            let qi = &q.row(i)[off..off + dk];
            let srow = scores.row_mut(i);
            for (j, s) in srow.iter_mut().enumerate() {
                let kj = &k.row(j)[off..off + dk];
                let mut acc = T::zero();
                for c in 0..dk {
                    acc += qi[c] * kj[c];
                }
                *s = acc * scale;
            }
        }
        let a = softmax_rows(&scores, mask)?;
        for i in 0..n {
            let arow = a.row(i);
            let orow = &mut heads_out.row_mut(i)[off..off + dk];
            for (j, &w) in arow.iter().enumerate() {
                let vj = &v.row(j)[off..off + dk];
                for c in 0..dk {
                    orow[c] += w * vj[c];
                }
            }
        }
        attn.push(a);
    }
    let out = linear(&heads_out, &params.wo, &params.bo);
    Ok((
        out,
        MhsaCache {
            input: h.clone(),
            q,
            k,
            v,
            attn,
            heads_out,
        },
    ))
}

pub fn mhsa_backward<T: Scalar>(
    dout: &Matrix<T>,
    cache: &MhsaCache<T>,
    params: &mut MhsaParams<T>,
) -> Matrix<T> {
    let d = params.d();
    let heads = cache.attn.len();
    let dk = d / heads;
    let n = dout.rows();
    let scale = T::one() / T::of(dk as f64).sqrt();
    let d_heads = linear_backward(&cache.heads_out, dout, &mut params.wo, &mut params.bo);
    let mut dq = Matrix::zeros(n, d);
    let mut dk_m = Matrix::zeros(n, d);
    let mut dv = Matrix::zeros(n, d);
    let mut da = vec![T::zero(); n];
    for (hd, a) in cache.attn.iter().enumerate() {
        let off = hd * dk;
        for i in 0..n {
            let go = &d_heads.row(i)[off..off + dk];
            let arow = a.row(i);
            // dA_ij = dO_i · V_j ; dV_j += A_ij dO_i
            for j in 0..n {
                let vj = &cache.v.row(j)[off..off + dk];
                let mut acc = T::zero();
                for c in 0..dk {
                    acc += go[c] * vj[c];
                }
                da[j] = acc;
                let w = arow[j];
                let dvj = &mut dv.row_mut(j)[off..off + dk];
                for c in 0..dk {
                    dvj[c] += w * go[c];
                }
            }
            let mut dot = T::zero();
            for j in 0..n {
                dot += arow[j] * da[j];
            }
            // dS_ij = A_ij (dA_ij - Σ_k A_ik dA_ik), then through the scaled dot product.
            let qi = &cache.q.row(i)[off..off + dk];
            for j in 0..n {
                let ds = arow[j] * (da[j] - dot) * scale;
                if ds == T::zero() {
                    continue;
                }
                let kj = &cache.k.row(j)[off..off + dk];
                let dqi = &mut dq.row_mut(i)[off..off + dk];
                for c in 0..dk {
                    dqi[c] += ds * kj[c];
                }
                let dkj = &mut dk_m.row_mut(j)[off..off + dk];
                for c in 0..dk {
                    dkj[c] += ds * qi[c];
                }
            }
        }
    }
    let mut dh = linear_backward(&cache.input, &dq, &mut params.wq, &mut params.bq);
    dh.add_assign(&linear_backward(&cache.input, &dk_m, &mut params.wk, &mut params.bk))
        .expect("same shape");
    dh.add_assign(&linear_backward(&cache.input, &dv, &mut params.wv, &mut params.bv))
        .expect("same shape");
    dh
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams<T = f64> {
    pub w1: ParamTensor<T>,
    pub b1: ParamTensor<T>,
    pub w2: ParamTensor<T>,
    pub b2: ParamTensor<T>,
}

impl<T: Scalar> FfnParams<T> {
    pub fn zeros(d: usize, d_ff: usize) -> Self {
        FfnParams {
            w1: ParamTensor::zeros(d, d_ff),
            b1: ParamTensor::zeros(1, d_ff),
            w2: ParamTensor::zeros(d_ff, d),
            b2: ParamTensor::zeros(1, d),
        }
    }

    pub fn tensors(&self) -> [&ParamTensor<T>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut ParamTensor<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }
}

impl<T: Scalar> Parameterized<T> for FfnParams<T> {
    fn params(&self) -> Vec<&ParamTensor<T>> {
        self.tensors().into()
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor<T>> {
        self.tensors_mut().into()
    }
}

#[derive(Debug, Clone)]
pub struct FfnCache<T = f64> {
    pub input: Matrix<T>,
    pub pre: Matrix<T>,
    pub act: Matrix<T>,
}

/// `ReLU(x·W1 + b1)·W2 + b2`.
pub fn ffn_forward<T: Scalar>(x: &Matrix<T>, params: &FfnParams<T>) -> Result<(Matrix<T>, FfnCache<T>)> {
    let (d, d_ff) = params.w1.value.shape();
    if x.cols() != d || params.w2.value.shape() != (d_ff, d) || params.b1.len() != d_ff || params.b2.len() != d {
        return Err(Error::shape(format!(
            "feed-forward input {:?} with W1 {:?} and W2 {:?}",
            x.shape(),
            params.w1.value.shape(),
            params.w2.value.shape()
        )));
    }
    let pre = linear(x, &params.w1, &params.b1);
    let mut act = pre.clone();
    for v in act.as_mut_slice() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    let out = linear(&act, &params.w2, &params.b2);
    Ok((
        out,
        FfnCache {
            input: x.clone(),
            pre,
            act,
        },
    ))
}

pub fn ffn_backward<T: Scalar>(dout: &Matrix<T>, cache: &FfnCache<T>, params: &mut FfnParams<T>) -> Matrix<T> {
    let FfnParams { w1, b1, w2, b2 } = params;
    let mut dpre = linear_backward(&cache.act, dout, w2, b2);
    for (g, p) in dpre.as_mut_slice().iter_mut().zip(cache.pre.as_slice()) {
        if *p <= T::zero() {
            *g = T::zero();
        }
    }
    linear_backward(&cache.input, &dpre, w1, b1)
}
