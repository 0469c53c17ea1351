//! Free-space trajectory distances.
//!
//! [`exact`] holds the quadratic dynamic programs used for ground truth,
//! [`approx`] the fast non-learning baselines, and [`matrix`] the pairwise
//! ground-truth matrix with its binary file format.

pub mod approx;
pub mod exact;
pub mod matrix;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::Point;

pub use approx::{fast_dtw, greedy_frechet, hausdorff_early_break, hausdorff_early_break_counted, FastDtwConfig};
pub use exact::{dtw, dtw_grid, frechet_discrete, ground_truth_similarity, hausdorff, DtwGrid};
pub use matrix::{compute_matrix, compute_matrix_subset, DistanceScale, GroundTruthMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMeasure {
    Dtw,
    Hausdorff,
    Frechet,
}

impl DistanceMeasure {
    pub const ALL: [DistanceMeasure; 3] = [Self::Dtw, Self::Hausdorff, Self::Frechet];

    /// Decay rate of the ground-truth similarity `exp(-alpha * d)`:
    /// 16 for DTW, 8 for the max-based measures.
    pub fn default_alpha(self) -> f64 {
        match self {
            DistanceMeasure::Dtw => 16.0,
            DistanceMeasure::Hausdorff | DistanceMeasure::Frechet => 8.0,
        }
    }

    /// One-byte code used in the ground-truth matrix header.
    pub fn code(self) -> u8 {
        match self {
            DistanceMeasure::Dtw => 1,
            DistanceMeasure::Hausdorff => 2,
            DistanceMeasure::Frechet => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(DistanceMeasure::Dtw),
            2 => Some(DistanceMeasure::Hausdorff),
            3 => Some(DistanceMeasure::Frechet),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceMeasure::Dtw => "dtw",
            DistanceMeasure::Hausdorff => "hausdorff",
            DistanceMeasure::Frechet => "frechet",
        }
    }

    /// Exact distance under this measure.
    pub fn distance<T: Scalar>(self, a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
        match self {
            DistanceMeasure::Dtw => dtw(a, b),
            DistanceMeasure::Hausdorff => hausdorff(a, b),
            DistanceMeasure::Frechet => frechet_discrete(a, b),
        }
    }
}

impl fmt::Display for DistanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dtw" => Ok(DistanceMeasure::Dtw),
            "hausdorff" => Ok(DistanceMeasure::Hausdorff),
            "frechet" | "fréchet" => Ok(DistanceMeasure::Frechet),
            other => Err(Error::arg(format!("unknown distance measure `{other}`"))),
        }
    }
}

pub(crate) fn check_non_empty<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::arg("distance of an empty trajectory"));
    }
    Ok(())
}
