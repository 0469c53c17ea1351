use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::stats::concentration_stats;
use super::topk::{topk_ground_truth_among, topk_repr, QueryResult};
use crate::distance::{DistanceMeasure, GroundTruthMatrix};
use crate::encoder::{Representation, SimFn, SimformerModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::Dataset;

/// Mean squared difference.
pub fn mse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::arg("mean squared error of an empty set"));
    }
    if preds.len() != targets.len() {
        return Err(Error::arg("predictions and targets differ in length"));
    }
    let sum: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / preds.len() as f64)
}

pub fn approximation_mse(preds: &[f64], gt_sims: &[f64]) -> Result<f64> {
    mse(preds, gt_sims)
}

fn prefix(r: &QueryResult, k: usize, what: &str) -> Result<HashSet<usize>> {
    if r.len() < k {
        return Err(Error::arg(format!("{what} list has {} entries, need {k}", r.len())));
    }
    Ok(r.neighbor_ids[..k].iter().copied().collect())
}

/// Share of the approximate top-k also in the true top-k.
pub fn hr_at_k(approx: &QueryResult, truth: &QueryResult, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::arg("k must be positive"));
    }
    let a = prefix(approx, k, "approximate")?;
    let t = prefix(truth, k, "ground-truth")?;
    Ok(a.intersection(&t).count() as f64 / k as f64)
}

/// Share of the true top-t found in the approximate top-k.
pub fn recall_t_at_k(approx: &QueryResult, truth: &QueryResult, t: usize, k: usize) -> Result<f64> {
    if t == 0 || t > k {
        return Err(Error::arg(format!("need 0 < t <= k, got t = {t}, k = {k}")));
    }
    let a = prefix(approx, k, "approximate")?;
    let tr = prefix(truth, t, "ground-truth")?;
    Ok(tr.intersection(&a).count() as f64 / t as f64)
}

/// Pairs in the true top-k whose approximate scores are in the wrong order.
pub fn inversions_at_k(truth: &QueryResult, approx_scores: &HashMap<usize, f64>, k: usize) -> Result<usize> {
    if truth.len() < k {
        return Err(Error::arg(format!("ground-truth list has {} entries, need {k}", truth.len())));
    }
    let scores = truth.neighbor_ids[..k]
        .iter()
        .map(|id| {
            approx_scores
                .get(id)
                .copied()
                .ok_or_else(|| Error::arg(format!("no approximate score for id {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut count = 0;
    for i in 0..k {
        for j in i + 1..k {
            if scores[i] < scores[j] {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub hr_ks: Vec<usize>,
    /// Recall is reported as `R{t}@{k}` for every `k` in `hr_ks` with `k >= t`.
    pub t: usize,
    pub inversion_ks: Vec<usize>,
    /// Evaluate only the first `n` test ids as queries.
    pub queries: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            hr_ks: vec![1, 10, 50, 100],
            t: 10,
            inversion_ks: vec![10, 20, 50, 100],
            queries: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub measure: DistanceMeasure,
    pub sim_fn: String,
    pub queries: usize,
    pub candidates: usize,
    pub hr: BTreeMap<String, f64>,
    pub recall: BTreeMap<String, f64>,
    pub inversions: BTreeMap<String, f64>,
    pub approx_mse: f64,
    pub avg_dim_std: f64,
}

/// Encodes `test_ids`, then for each query searches the other test ids by
/// the model's similarity and compares against the ground truth.
pub fn evaluate<T: Scalar>(
    model: &SimformerModel<T>,
    dataset: &Dataset<T>,
    gt: &GroundTruthMatrix,
    test_ids: &[usize],
    sim_fn: SimFn,
    cfg: &EvalConfig,
) -> Result<MetricsReport> {
    if !gt.covers(test_ids) {
        return Err(Error::Config("ground-truth matrix does not cover the test ids".into()));
    }
    let candidates = test_ids.len().saturating_sub(1);
    let kmax = cfg.hr_ks.iter().chain(&cfg.inversion_ks).copied().max().unwrap_or(0).max(cfg.t);
    if kmax == 0 || kmax > candidates {
        return Err(Error::arg(format!(
            "largest k = {kmax} needs more than the {} test trajectories",
            test_ids.len()
        )));
    }
    let sim = sim_fn.resolve();
    let reps = encode_ids(model, dataset, test_ids)?;
    let queries = cfg.queries.unwrap_or(test_ids.len()).min(test_ids.len());
    let ks: Vec<usize> = cfg.hr_ks.iter().copied().filter(|&k| k >= cfg.t).collect();
    let mut hr = vec![0.0; cfg.hr_ks.len()];
    let mut rec = vec![0.0; ks.len()];
    let mut inv = vec![0.0; cfg.inversion_ks.len()];
    let (mut preds, mut targets) = (Vec::new(), Vec::new());
    for (qi, &q) in test_ids.iter().enumerate().take(queries) {
        let truth = topk_ground_truth_among(gt, q, test_ids, kmax)?;
        let approx = topk_repr(test_ids, &reps, &reps[qi], sim, kmax, Some(q))?;
        for (acc, &k) in hr.iter_mut().zip(&cfg.hr_ks) {
            *acc += hr_at_k(&approx, &truth, k)?;
        }
        for (acc, &k) in rec.iter_mut().zip(&ks) {
            *acc += recall_t_at_k(&approx, &truth, cfg.t, k)?;
        }
        let qrow = gt.row_of(q).unwrap();
        let mut scores = HashMap::with_capacity(test_ids.len());
        for (ci, &c) in test_ids.iter().enumerate() {
            if c == q {
                continue;
            }
            let s = sim.eval(reps[qi].as_slice(), reps[ci].as_slice())?.as_f64();
            scores.insert(c, s);
            preds.push(s);
            targets.push(gt.similarity(qrow, gt.row_of(c).unwrap()));
        }
        for (acc, &k) in inv.iter_mut().zip(&cfg.inversion_ks) {
            *acc += inversions_at_k(&truth, &scores, k)? as f64;
        }
    }
    let nq = queries.max(1) as f64;
    let stats = concentration_stats(&reps)?;
    Ok(MetricsReport {
        measure: gt.measure,
        sim_fn: sim.to_string(),
        queries,
        candidates,
        hr: cfg.hr_ks.iter().zip(hr).map(|(k, v)| (format!("HR@{k}"), v / nq)).collect(),
        recall: ks.iter().zip(rec).map(|(k, v)| (format!("R{}@{k}", cfg.t), v / nq)).collect(),
        inversions: cfg.inversion_ks.iter().zip(inv).map(|(k, v)| (format!("INV@{k}"), v / nq)).collect(),
        approx_mse: approximation_mse(&preds, &targets)?,
        avg_dim_std: stats.avg_std,
    })
}

pub(crate) fn encode_ids<T: Scalar>(
    model: &SimformerModel<T>,
    dataset: &Dataset<T>,
    ids: &[usize],
) -> Result<Vec<Representation<T>>> {
    ids.iter()
        .map(|&id| {
            let t = dataset
                .get(id)
                .ok_or_else(|| Error::Config(format!("trajectory {id} is not in the dataset")))?;
            model.encode(&t.points)
        })
        .collect()
}
