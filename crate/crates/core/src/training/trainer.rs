use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pairs::{sample_pairs, PairSample};
use crate::distance::{DistanceMeasure, GroundTruthMatrix};
use crate::encoder::{SimformerModel, Similarity};
use crate::error::{Error, Result};
use crate::eval::{hr_at_k, mse, topk_ground_truth_among, topk_repr};
use crate::numeric::{adam_step, AdamConfig, AdamState, Parameterized};
use crate::scalar::Scalar;
use crate::trajectory::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    /// Partners drawn per anchor.
    pub pairs_per_anchor: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    /// Hard cap on optimizer steps.
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub measure: DistanceMeasure,
    pub alpha: f64,
}

impl TrainConfig {
    pub fn for_measure(measure: DistanceMeasure) -> Self {
        TrainConfig {
            lr: 0.0005,
            batch_size: 20,
            pairs_per_anchor: 20,
            max_epochs: 200,
            patience: 20,
            max_steps: None,
            seed: 0,
            measure,
            alpha: measure.default_alpha(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_hr10: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T: Scalar = f64> {
    /// Parameters from the epoch with the best validation HR@10.
    pub model: SimformerModel<T>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    /// Optimizer steps taken in total.
    pub steps: usize,
    /// Loss of every optimizer step.
    pub step_losses: Vec<f64>,
}

pub fn mse_loss(preds: &[f64], targets: &[f64]) -> Result<f64> {
    mse(preds, targets)
}

/// Mean squared error of one batch of pairs. Every trajectory is encoded
/// once, and gradients from both sides of each pair are accumulated into
/// the shared parameters.
pub fn batch_loss_and_grad<T: Scalar>(
    model: &mut SimformerModel<T>,
    dataset: &Dataset<T>,
    batch: &[PairSample],
    sim: Similarity,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::arg("empty batch"));
    }
    let mut slots = BTreeMap::new();
    for p in batch {
        for id in [p.anchor_id, p.other_id] {
            let next = slots.len();
            slots.entry(id).or_insert(next);
        }
    }
    let mut encoded: Vec<Option<_>> = (0..slots.len()).map(|_| None).collect();
    for (&id, &slot) in &slots {
        let t = dataset
            .get(id)
            .ok_or_else(|| Error::Config(format!("trajectory {id} is not in the dataset")))?;
        encoded[slot] = Some(model.forward(&t.points, None)?);
    }
    let encoded: Vec<_> = encoded.into_iter().map(Option::unwrap).collect();
    let d = model.d();
    let mut grads = vec![vec![T::zero(); d]; encoded.len()];
    let mut preds = Vec::with_capacity(batch.len());
    let mut targets = Vec::with_capacity(batch.len());
    let scale = T::of(2.0 / batch.len() as f64);
    for p in batch {
        let (a, b) = (slots[&p.anchor_id], slots[&p.other_id]);
        let (s, ga, gb) = sim.eval_with_grad(encoded[a].0.as_slice(), encoded[b].0.as_slice())?;
        let r = (s - T::of(p.gt_sim)) * scale;
        for k in 0..d {
            grads[a][k] += r * ga[k];
            grads[b][k] += r * gb[k];
        }
        preds.push(s.as_f64());
        targets.push(p.gt_sim);
    }
    for ((_, cache), g) in encoded.iter().zip(&grads) {
        model.backward(cache, g);
    }
    mse_loss(&preds, &targets)
}

/// Fingerprint of the piecewise-linear regime a batch is evaluated in
/// (ReLU gates of every encoded trajectory plus Chebyshev argmax choices),
/// for use with [`crate::numeric::gradient_check_piecewise`].
pub fn batch_regime<T: Scalar>(
    model: &SimformerModel<T>,
    dataset: &Dataset<T>,
    batch: &[PairSample],
    sim: Similarity,
) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for p in batch {
        let a = model.forward(&dataset.get(p.anchor_id).unwrap().points, None)?;
        let b = model.forward(&dataset.get(p.other_id).unwrap().points, None)?;
        for (_, cache) in [&a, &b] {
            out.extend(cache.relu_gates().chunks(64).map(|c| {
                c.iter().enumerate().fold(0u64, |w, (i, &g)| w | ((g as u64) << i))
            }));
        }
        if let Some((k, sign)) = sim.regime(a.0.as_slice(), b.0.as_slice()) {
            out.push(((k as u64) << 1) | sign as u64);
        }
    }
    Ok(out)
}

/// HR@10 (or HR@(n-1) for fewer than 11 ids) of each validation id
/// searched among the others.
fn validation_hr<T: Scalar>(
    model: &SimformerModel<T>,
    dataset: &Dataset<T>,
    gt: &GroundTruthMatrix,
    val_ids: &[usize],
    sim: Similarity,
) -> Result<f64> {
    if val_ids.len() < 2 {
        return Ok(0.0);
    }
    let k = 10.min(val_ids.len() - 1);
    let reps = val_ids
        .iter()
        .map(|&id| model.encode(&dataset.get(id).unwrap().points))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for (i, &q) in val_ids.iter().enumerate() {
        let truth = topk_ground_truth_among(gt, q, val_ids, k)?;
        let approx = topk_repr(val_ids, &reps, &reps[i], sim, k, Some(q))?;
        total += hr_at_k(&approx, &truth, k)?;
    }
    Ok(total / val_ids.len() as f64)
}

fn check_inputs<T: Scalar>(
    model: &SimformerModel<T>,
    dataset: &Dataset<T>,
    gt: &GroundTruthMatrix,
    ids: &[usize],
    cfg: &TrainConfig,
) -> Result<()> {
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if gt.measure != cfg.measure || gt.alpha != cfg.alpha {
        return Err(Error::Config(format!(
            "ground truth is {} with alpha {}, training expects {} with alpha {}",
            gt.measure, gt.alpha, cfg.measure, cfg.alpha
        )));
    }
    if !gt.covers(ids) {
        return Err(Error::Config("ground-truth matrix does not cover the training and validation ids".into()));
    }
    for &id in ids {
        let t = dataset
            .get(id)
            .ok_or_else(|| Error::Config(format!("trajectory {id} is not in the dataset")))?;
        if t.len() > model.config.max_len {
            return Err(Error::Config(format!(
                "trajectory {id} has {} points, model accepts {}",
                t.len(),
                model.config.max_len
            )));
        }
    }
    Ok(())
}

/// Trains with Adam on a fixed pair set sampled once from `train_ids`,
/// shuffled every epoch. Validation HR@10 is computed after each epoch and
/// the best model so far is kept; training stops after `patience` epochs
/// without strict improvement, after `max_epochs`, or at `max_steps`.
pub fn train<T: Scalar>(
    mut model: SimformerModel<T>,
    dataset: &Dataset<T>,
    gt: &GroundTruthMatrix,
    train_ids: &[usize],
    val_ids: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    let all: Vec<usize> = train_ids.iter().chain(val_ids).copied().collect();
    check_inputs(&model, dataset, gt, &all, cfg)?;
    let mut outcome = TrainOutcome {
        model: model.clone(),
        history: Vec::new(),
        best_epoch: None,
        steps: 0,
        step_losses: Vec::new(),
    };
    if cfg.max_epochs == 0 {
        return Ok(outcome);
    }
    let sim = model.config.sim_fn.resolve();
    let mut pairs = sample_pairs(train_ids, cfg.pairs_per_anchor, gt, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let adam = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let mut state = AdamState::new(adam, &model.params());
    let mut best = f64::NEG_INFINITY;
    let mut stale = 0;
    for epoch in 1..=cfg.max_epochs {
        pairs.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for batch in pairs.chunks(cfg.batch_size) {
            if cfg.max_steps.is_some_and(|m| outcome.steps >= m) {
                break;
            }
            model.zero_grad();
            outcome.steps += 1;
            let step = outcome.steps;
            let loss = batch_loss_and_grad(&mut model, dataset, batch, sim).map_err(|e| match e {
                Error::Numeric { msg, .. } => Error::Numeric { step, msg },
                e => e,
            })?;
            if !loss.is_finite() {
                return Err(Error::Numeric {
                    step: outcome.steps,
                    msg: format!("training loss is {loss}"),
                });
            }
            adam_step(&mut model.params_mut(), &mut state)?;
            outcome.step_losses.push(loss);
            loss_sum += loss;
            batches += 1;
        }
        if batches == 0 {
            break;
        }
        let val_hr10 = validation_hr(&model, dataset, gt, val_ids, sim)?;
        outcome.history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / batches as f64,
            val_hr10,
        });
        if val_hr10 > best {
            best = val_hr10;
            stale = 0;
            outcome.model = model.clone();
            outcome.best_epoch = Some(epoch);
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(outcome)
}

/// CSV with header `epoch,train_loss,val_hr10`.
pub fn write_history_csv<W: Write>(mut w: W, history: &[EpochRecord]) -> Result<()> {
    writeln!(w, "epoch,train_loss,val_hr10")?;
    for r in history {
        writeln!(w, "{},{},{}", r.epoch, r.train_loss, r.val_hr10)?;
    }
    Ok(())
}
