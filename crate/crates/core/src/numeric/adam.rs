use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, ParamTensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.0005,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f64> {
    pub cfg: AdamConfig,
    pub m: Vec<Matrix<T>>,
    pub v: Vec<Matrix<T>>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(cfg: AdamConfig, params: &[&ParamTensor<T>]) -> Self {
        let zeros = || -> Vec<Matrix<T>> {
            params
                .iter()
                .map(|p| Matrix::zeros(p.value.rows(), p.value.cols()))
                .collect()
        };
        AdamState {
            cfg,
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update. Gradients are left in place.
pub fn adam_step<T: Scalar>(params: &mut [&mut ParamTensor<T>], state: &mut AdamState<T>) -> Result<()> {
    if params.len() != state.m.len() {
        return Err(Error::shape(format!(
            "optimizer tracks {} tensors, got {}",
            state.m.len(),
            params.len()
        )));
    }
    for (p, m) in params.iter().zip(&state.m) {
        if p.value.shape() != m.shape() || p.grad.shape() != m.shape() {
            return Err(Error::shape("parameter shape changed under the optimizer"));
        }
    }
    state.t += 1;
    let cfg = state.cfg;
    let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
    let one = T::one();
    let bc1 = one - T::of(cfg.beta1.powf(state.t as f64));
    let bc2 = one - T::of(cfg.beta2.powf(state.t as f64));
    let lr = T::of(cfg.lr);
    let eps = T::of(cfg.eps);
    for ((p, m), v) in params.iter_mut().zip(&mut state.m).zip(&mut state.v) {
        let g = p.grad.as_slice();
        let w = p.value.as_mut_slice();
        let m = m.as_mut_slice();
        let v = v.as_mut_slice();
        for k in 0..w.len() {
            m[k] = b1 * m[k] + (one - b1) * g[k];
            v[k] = b2 * v[k] + (one - b2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            w[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = ParamTensor::new(Matrix::from_rows(&[vec![1.0, -2.0]]).unwrap());
        let before = p.value.clone();
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        for _ in 0..5 {
            adam_step(&mut [&mut p], &mut st).unwrap();
        }
        assert_eq!(p.value, before);
        assert_eq!(st.t, 5);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = ParamTensor::new(Matrix::filled(1, 1, 0.0f64));
        p.grad.fill(1.0);
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        adam_step(&mut [&mut p], &mut st).unwrap();
        assert!((p.value.get(0, 0) + 0.0005).abs() < 1e-10);
        assert_eq!(p.grad.get(0, 0), 1.0);
    }

    #[test]
    fn quadratic_bowl_converges() {
        let mut p = ParamTensor::new(Matrix::filled(1, 1, 1.0f64));
        let mut st = AdamState::new(AdamConfig::default(), &[&p]);
        let mut steps = 0;
        while p.value.get(0, 0).abs() >= 1e-3 && steps < 5000 {
            let w = p.value.get(0, 0);
            p.grad.set(0, 0, 2.0 * w);
            adam_step(&mut [&mut p], &mut st).unwrap();
            steps += 1;
        }
        assert!(p.value.get(0, 0).abs() < 1e-3, "stuck at {} after {steps}", p.value.get(0, 0));
    }

    #[test]
    fn rejects_mismatched_state() {
        let mut p = ParamTensor::<f64>::zeros(2, 2);
        let q = ParamTensor::<f64>::zeros(1, 2);
        let mut st = AdamState::new(AdamConfig::default(), &[&q]);
        assert!(adam_step(&mut [&mut p], &mut st).is_err());
    }
}
