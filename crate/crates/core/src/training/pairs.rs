use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::GroundTruthMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub anchor_id: usize,
    pub other_id: usize,
    pub gt_sim: f64,
}

/// Pairs every anchor in `train_ids` with `s` distinct other training ids,
/// drawn uniformly without replacement.
pub fn sample_pairs(train_ids: &[usize], s: usize, gt: &GroundTruthMatrix, seed: u64) -> Result<Vec<PairSample>> {
    if s == 0 || s >= train_ids.len() {
        return Err(Error::arg(format!(
            "{s} partners per anchor needs more than {} training trajectories (and s >= 1)",
            train_ids.len()
        )));
    }
    let rows = train_ids
        .iter()
        .map(|&id| {
            gt.row_of(id)
                .ok_or_else(|| Error::Config(format!("ground-truth matrix does not cover id {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(train_ids.len() * s);
    for (a, &anchor) in train_ids.iter().enumerate() {
        for j in index::sample(&mut rng, train_ids.len() - 1, s) {
            let o = if j >= a { j + 1 } else { j };
            out.push(PairSample {
                anchor_id: anchor,
                other_id: train_ids[o],
                gt_sim: gt.similarity(rows[a], rows[o]),
            });
        }
    }
    Ok(out)
}
