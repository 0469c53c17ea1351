use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::Parameterized;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub eps: f64,
    /// Coordinates compared; all of them when the model has fewer.
    pub samples: usize,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            eps: 1e-5,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Maximum of `|a - n| / max(1e-8, |a| + |n|)` over checked coordinates.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates whose perturbation left the base regime.
    pub skipped: usize,
}

/// Compares analytic gradients against central differences.
///
/// `loss` must return the loss and add its gradient into the model's
/// `grad` tensors. Returns the maximum over sampled coordinates of
/// `|a - n| / max(1e-8, |a| + |n|)`.
pub fn gradient_check<M, F>(model: &mut M, loss: F, cfg: GradCheckConfig) -> Result<f64>
where
    M: Parameterized<f64>,
    F: FnMut(&mut M) -> Result<f64>,
{
    gradient_check_piecewise(model, loss, |_| Ok(Vec::new()), cfg).map(|r| r.max_rel_error)
}

/// [`gradient_check`] for piecewise-smooth losses. `regime` fingerprints
/// the active piece (ReLU gates, argmax choices); a coordinate whose `±eps`
/// perturbation changes the fingerprint straddles a kink, where central
/// differences are not a derivative estimate, and is skipped.
pub fn gradient_check_piecewise<M, F, R>(
    model: &mut M,
    mut loss: F,
    mut regime: R,
    cfg: GradCheckConfig,
) -> Result<GradCheckReport>
where
    M: Parameterized<f64>,
    F: FnMut(&mut M) -> Result<f64>,
    R: FnMut(&M) -> Result<Vec<u64>>,
{
    let finite = |v: f64, what: &str| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric {
                step: 0,
                msg: format!("{what} loss is {v}"),
            })
        }
    };
    model.zero_grad();
    finite(loss(model)?, "base")?;
    let base = regime(model)?;
    let mut coords = Vec::new();
    let mut analytic = Vec::new();
    for (t, p) in model.params().iter().enumerate() {
        for (k, g) in p.grad.as_slice().iter().enumerate() {
            coords.push((t, k));
            analytic.push(*g);
        }
    }
    let picked: Vec<usize> = if coords.len() <= cfg.samples {
        (0..coords.len()).collect()
    } else {
        let mut idx = sample(&mut ChaCha8Rng::seed_from_u64(cfg.seed), coords.len(), cfg.samples).into_vec();
        idx.sort_unstable();
        idx
    };
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    for c in picked {
        let (t, k) = coords[c];
        let orig = model.params()[t].value.as_slice()[k];
        let mut eval = |model: &mut M, x: f64| -> Result<(f64, bool)> {
            model.params_mut()[t].value.as_mut_slice()[k] = x;
            let l = finite(loss(model)?, "perturbed")?;
            Ok((l, regime(model)? == base))
        };
        let (plus, same_plus) = eval(model, orig + cfg.eps)?;
        let (minus, same_minus) = eval(model, orig - cfg.eps)?;
        model.params_mut()[t].value.as_mut_slice()[k] = orig;
        if !(same_plus && same_minus) {
            report.skipped += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * cfg.eps);
        let a = analytic[c];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    model.zero_grad();
    Ok(report)
}
