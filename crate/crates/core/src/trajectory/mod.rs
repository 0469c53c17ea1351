//! Trajectory data model, ingestion, preprocessing and synthetic data.

mod io;
mod preprocess;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use io::{
    format_csv_line, norm_sidecar_path, parse_csv_line, read_dataset, read_norm_stats,
    write_dataset, write_norm_stats, FileFormat,
};
pub use preprocess::{filter_by_bbox, filter_by_length, normalize, split, BoundingBox, SplitSpec};
pub use synth::{augment_noise, generate_synthetic, SYNTHETIC_STEP_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T = f64> {
    pub lon: T,
    pub lat: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(lon: T, lat: T) -> Self {
        Point { lon, lat }
    }

    /// Euclidean distance.
    #[inline]
    pub fn dist(&self, other: &Self) -> T {
        let dx = self.lon - other.lon;
        let dy = self.lat - other.lat;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.lon.is_finite() && self.lat.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T = f64> {
    pub id: usize,
    pub points: Vec<Point<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(id: usize, points: Vec<Point<T>>) -> Self {
        Trajectory { id, points }
    }

    pub fn from_coords(id: usize, coords: &[(f64, f64)]) -> Self {
        let points = coords
            .iter()
            .map(|&(x, y)| Point::new(T::of(x), T::of(y)))
            .collect();
        Trajectory { id, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cast<U: Scalar>(&self) -> Trajectory<U> {
        Trajectory {
            id: self.id,
            points: self
                .points
                .iter()
                .map(|p| Point::new(U::of(p.lon.as_f64()), U::of(p.lat.as_f64())))
                .collect(),
        }
    }
}

/// Per-axis z-score parameters recorded by [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean_lon: f64,
    pub mean_lat: f64,
    pub std_lon: f64,
    pub std_lat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T = f64> {
    pub name: String,
    pub trajectories: Vec<Trajectory<T>>,
    pub normalized: bool,
    pub norm_stats: Option<NormStats>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset, renumbering ids from 0 in the given order.
    pub fn new(name: impl Into<String>, trajectories: Vec<Trajectory<T>>) -> Self {
        let mut d = Dataset {
            name: name.into(),
            trajectories,
            normalized: false,
            norm_stats: None,
        };
        d.renumber();
        d
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Trajectory<T>> {
        self.trajectories.get(id)
    }

    pub fn max_len(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).max().unwrap_or(0)
    }

    pub fn point_count(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub(crate) fn renumber(&mut self) {
        for (i, t) in self.trajectories.iter_mut().enumerate() {
            t.id = i;
        }
    }

    /// Keeps the listed ids, in the listed order, renumbered from 0.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        let mut trajectories = Vec::with_capacity(ids.len());
        for &id in ids {
            let t = self
                .get(id)
                .ok_or_else(|| Error::arg(format!("trajectory id {id} out of range")))?;
            trajectories.push(t.clone());
        }
        let mut d = Dataset {
            name: self.name.clone(),
            trajectories,
            normalized: self.normalized,
            norm_stats: self.norm_stats,
        };
        d.renumber();
        Ok(d)
    }

    /// Checks the structural invariants: contiguous ids, non-empty
    /// trajectories, finite coordinates, stats present when normalized.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.trajectories.iter().enumerate() {
            if t.id != i {
                return Err(Error::arg(format!("trajectory at position {i} has id {}", t.id)));
            }
            if t.is_empty() {
                return Err(Error::arg(format!("trajectory {i} has no points")));
            }
            if let Some(j) = t.points.iter().position(|p| !p.is_finite()) {
                return Err(Error::arg(format!("trajectory {i} point {j} is not finite")));
            }
        }
        if self.normalized && self.norm_stats.is_none() {
            return Err(Error::arg("normalized dataset without norm stats"));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            name: self.name.clone(),
            trajectories: self.trajectories.iter().map(Trajectory::cast).collect(),
            normalized: self.normalized,
            norm_stats: self.norm_stats,
        }
    }
}
