use serde::{Deserialize, Serialize};

use crate::encoder::Representation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationStats {
    pub means: Vec<f64>,
    /// Population standard deviation per dimension.
    pub stds: Vec<f64>,
    pub avg_std: f64,
}

pub fn concentration_stats<T: Scalar>(reps: &[Representation<T>]) -> Result<ConcentrationStats> {
    if reps.len() < 2 {
        return Err(Error::arg("concentration statistics need at least two representations"));
    }
    let d = reps[0].dim();
    if reps.iter().any(|r| r.dim() != d) {
        return Err(Error::arg("representations differ in dimension"));
    }
    let n = reps.len() as f64;
    let mut means = vec![0.0; d];
    for r in reps {
        for (m, v) in means.iter_mut().zip(r.as_slice()) {
            *m += v.as_f64();
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![0.0; d];
    for r in reps {
        for ((s, m), v) in stds.iter_mut().zip(&means).zip(r.as_slice()) {
            let c = v.as_f64() - m;
            *s += c * c;
        }
    }
    stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    let avg_std = if d == 0 { 0.0 } else { stds.iter().sum::<f64>() / d as f64 };
    Ok(ConcentrationStats { means, stds, avg_std })
}

/// Equal-width bins over `[0, 1]`; each bin is left-closed and the last one
/// also contains 1.
pub fn similarity_histogram(values: &[f64], bins: usize) -> Result<Vec<usize>> {
    if bins == 0 {
        return Err(Error::arg("need at least one bin"));
    }
    let mut counts = vec![0; bins];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::arg(format!("value {v} outside [0, 1]")));
        }
        let b = ((v * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(counts)
}
