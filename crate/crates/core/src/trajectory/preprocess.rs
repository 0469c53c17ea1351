use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, NormStats, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Keeps trajectories with `min_len <= n <= max_len`, renumbering ids.
pub fn filter_by_length<T: Scalar>(d: &Dataset<T>, min_len: usize, max_len: usize) -> Result<Dataset<T>> {
    if min_len > max_len {
        return Err(Error::arg(format!("min_len {min_len} exceeds max_len {max_len}")));
    }
    let mut out = Dataset {
        name: d.name.clone(),
        trajectories: d
            .trajectories
            .iter()
            .filter(|t| (min_len..=max_len).contains(&t.len()))
            .cloned()
            .collect(),
        normalized: d.normalized,
        norm_stats: d.norm_stats,
    };
    out.renumber();
    Ok(out)
}

/// Closed lon/lat box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl BoundingBox {
    pub fn new(lon_min: f64, lon_max: f64, lat_min: f64, lat_max: f64) -> Result<Self> {
        // NaN bounds fail both comparisons.
        if !(lon_min < lon_max) || !(lat_min < lat_max) {
            return Err(Error::arg(format!(
                "inverted bounding box [{lon_min},{lon_max}]x[{lat_min},{lat_max}]"
            )));
        }
        Ok(BoundingBox {
            lon_min,
            lon_max,
            lat_min,
            lat_max,
        })
    }

    pub fn contains<T: Scalar>(&self, p: &Point<T>) -> bool {
        let (x, y) = (p.lon.as_f64(), p.lat.as_f64());
        x >= self.lon_min && x <= self.lon_max && y >= self.lat_min && y <= self.lat_max
    }
}

/// Keeps trajectories whose every point lies inside `bbox`.
pub fn filter_by_bbox<T: Scalar>(d: &Dataset<T>, bbox: &BoundingBox) -> Dataset<T> {
    let mut out = Dataset {
        name: d.name.clone(),
        trajectories: d
            .trajectories
            .iter()
            .filter(|t| t.points.iter().all(|p| bbox.contains(p)))
            .cloned()
            .collect(),
        normalized: d.normalized,
        norm_stats: d.norm_stats,
    };
    out.renumber();
    out
}

/// Z-scores each axis over all points of all trajectories.
pub fn normalize<T: Scalar>(d: &Dataset<T>) -> Result<Dataset<T>> {
    if d.normalized {
        return Err(Error::AlreadyNormalized);
    }
    let count = d.point_count();
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = count as f64;
    let points = || d.trajectories.iter().flat_map(|t| t.points.iter());
    let mean_lon = points().map(|p| p.lon.as_f64()).sum::<f64>() / n;
    let mean_lat = points().map(|p| p.lat.as_f64()).sum::<f64>() / n;
    let var_lon = points().map(|p| (p.lon.as_f64() - mean_lon).powi(2)).sum::<f64>() / n;
    let var_lat = points().map(|p| (p.lat.as_f64() - mean_lat).powi(2)).sum::<f64>() / n;
    let std_lon = var_lon.sqrt();
    let std_lat = var_lat.sqrt();
    if !(std_lon > 0.0) || !(std_lat > 0.0) {
        return Err(Error::DegenerateData(
            "zero variance on a coordinate axis".into(),
        ));
    }
    let stats = NormStats {
        mean_lon,
        mean_lat,
        std_lon,
        std_lat,
    };
    let mut out = d.clone();
    for p in out.trajectories.iter_mut().flat_map(|t| t.points.iter_mut()) {
        p.lon = T::of((p.lon.as_f64() - mean_lon) / std_lon);
        p.lat = T::of((p.lat.as_f64() - mean_lat) / std_lat);
    }
    out.normalized = true;
    out.norm_stats = Some(stats);
    Ok(out)
}

/// Train/validation/test partition of dataset ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_ids: Vec<usize>,
    pub val_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn total(&self) -> usize {
        self.train_ids.len() + self.val_ids.len() + self.test_ids.len()
    }
}

/// Seeded 2:1:7 split; train and validation sizes are floored, the
/// remainder goes to test.
pub fn split<T: Scalar>(d: &Dataset<T>, seed: u64) -> Result<SplitSpec> {
    split_ids(d.len(), seed)
}

pub(crate) fn split_ids(n: usize, seed: u64) -> Result<SplitSpec> {
    if n < 10 {
        return Err(Error::arg(format!("split needs at least 10 trajectories, got {n}")));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n * 2 / 10;
    let n_val = n / 10;
    let test_ids = ids.split_off(n_train + n_val);
    let val_ids = ids.split_off(n_train);
    Ok(SplitSpec {
        train_ids: ids,
        val_ids,
        test_ids,
        seed,
    })
}
