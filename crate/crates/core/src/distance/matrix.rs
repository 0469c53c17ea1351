//! Pairwise ground-truth distance matrix.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "GTM1"
//! 4       4     n (u32)
//! 8       1     measure code (1 dtw, 2 hausdorff, 3 frechet)
//! 9       3     zero padding
//! 12      8     alpha (f64)
//! 20      8n²   distances, row-major f64
//! ```
//!
//! A `<file>.meta.json` sidecar carries the dataset name, the normalization
//! flag, the distance scale and, for subset matrices, the row → id map.

use std::collections::HashMap;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DistanceMeasure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::Dataset;

pub const GTM_MAGIC: &[u8; 4] = b"GTM1";
pub const GTM_HEADER_LEN: usize = 20;

/// Divisor applied to distances before the similarity transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceScale {
    /// Raw distances.
    None,
    /// Distances divided by the largest entry of the matrix.
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMatrix {
    pub n: usize,
    pub measure: DistanceMeasure,
    pub alpha: f64,
    /// Row-major `n × n` exact distances.
    pub distances: Vec<f64>,
    pub normalized_input: bool,
    pub dataset_name: String,
    /// Divisor applied to every distance inside [`Self::similarity`].
    pub scale: f64,
    /// Dataset id of each row.
    pub ids: Vec<usize>,
    row_of: HashMap<usize, usize>,
}

#[derive(Serialize, Deserialize)]
struct MatrixMeta {
    dataset: String,
    normalized_input: bool,
    measure: DistanceMeasure,
    alpha: f64,
    distance_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ids: Option<Vec<usize>>,
}

fn index_ids(ids: &[usize]) -> HashMap<usize, usize> {
    ids.iter().enumerate().map(|(row, &id)| (id, row)).collect()
}

/// Exact pairwise matrix over the whole dataset.
pub fn compute_matrix<T: Scalar>(
    d: &Dataset<T>,
    measure: DistanceMeasure,
    alpha: f64,
    worker_count: usize,
) -> Result<GroundTruthMatrix> {
    let ids: Vec<usize> = (0..d.len()).collect();
    compute_matrix_subset(d, &ids, measure, alpha, worker_count)
}

/// Exact pairwise matrix over `ids`; row `r` corresponds to `ids[r]`.
///
/// Only the upper triangle is computed; each entry depends on its pair alone,
/// so the result is bit-identical for every `worker_count`.
pub fn compute_matrix_subset<T: Scalar>(
    d: &Dataset<T>,
    ids: &[usize],
    measure: DistanceMeasure,
    alpha: f64,
    worker_count: usize,
) -> Result<GroundTruthMatrix> {
    if d.is_empty() || ids.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha must be positive, got {alpha}")));
    }
    if worker_count == 0 {
        return Err(Error::arg("worker_count must be at least 1"));
    }
    let trajs = ids
        .iter()
        .map(|&id| {
            d.get(id)
                .map(|t| t.points.as_slice())
                .ok_or_else(|| Error::arg(format!("trajectory id {id} out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = trajs.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count)
        .build()
        .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<Vec<f64>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                ((i + 1)..n)
                    .map(|j| measure.distance(trajs[i], trajs[j]).map(Scalar::as_f64))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut distances = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            distances[i * n + j] = v;
            distances[j * n + i] = v;
        }
    }
    Ok(GroundTruthMatrix {
        n,
        measure,
        alpha,
        distances,
        normalized_input: d.normalized,
        dataset_name: d.name.clone(),
        scale: 1.0,
        ids: ids.to_vec(),
        row_of: index_ids(ids),
    })
}

impl GroundTruthMatrix {
    /// Builds a matrix from raw parts, checking every invariant.
    pub fn from_parts(
        measure: DistanceMeasure,
        alpha: f64,
        distances: Vec<f64>,
        ids: Vec<usize>,
    ) -> Result<Self> {
        let n = ids.len();
        let m = GroundTruthMatrix {
            n,
            measure,
            alpha,
            distances,
            normalized_input: false,
            dataset_name: String::new(),
            scale: 1.0,
            row_of: index_ids(&ids),
            ids,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.distances.len() != n * n || self.ids.len() != n {
            return Err(Error::format(format!(
                "matrix of order {n} has {} entries and {} ids",
                self.distances.len(),
                self.ids.len()
            )));
        }
        if self.row_of.len() != n {
            return Err(Error::format("duplicate trajectory ids in matrix"));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::format(format!("alpha {} is not positive", self.alpha)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::format(format!("distance scale {} is not positive", self.scale)));
        }
        for i in 0..n {
            if self.distances[i * n + i] != 0.0 {
                return Err(Error::format(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let v = self.distances[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::format(format!("invalid distance {v} at ({i}, {j})")));
                }
                if v.to_bits() != self.distances[j * n + i].to_bits() {
                    return Err(Error::format(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    /// Sets the divisor used by [`Self::similarity`].
    pub fn with_scale(mut self, scale: DistanceScale) -> Self {
        self.scale = match scale {
            DistanceScale::None => 1.0,
            DistanceScale::Max => {
                let max = self.distances.iter().copied().fold(0.0, f64::max);
                if max > 0.0 {
                    max
                } else {
                    1.0
                }
            }
        };
        self
    }

    /// Distance between rows `i` and `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.n + j]
    }

    /// Ground-truth similarity `exp(-alpha * d / scale)` between rows.
    #[inline]
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        (-self.alpha * (self.get(i, j) / self.scale)).exp()
    }

    /// Row index of a dataset id.
    pub fn row_of(&self, id: usize) -> Option<usize> {
        self.row_of.get(&id).copied()
    }

    pub fn covers(&self, ids: &[usize]) -> bool {
        ids.iter().all(|id| self.row_of.contains_key(id))
    }

    fn is_identity_map(&self) -> bool {
        self.ids.iter().enumerate().all(|(r, &id)| r == id)
    }

    pub fn meta_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(GTM_HEADER_LEN + 8 * self.distances.len());
        buf.extend_from_slice(GTM_MAGIC);
        buf.extend_from_slice(&(self.n as u32).to_le_bytes());
        buf.push(self.measure.code());
        buf.extend_from_slice(&[0u8; 3]);
        buf.extend_from_slice(&self.alpha.to_le_bytes());
        for v in &self.distances {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf
    }

    /// Parses the binary part; metadata fields get their defaults.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < GTM_HEADER_LEN {
            return Err(Error::format("ground-truth file shorter than its header"));
        }
        if &bytes[0..4] != GTM_MAGIC {
            return Err(Error::format("bad ground-truth magic"));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let measure = DistanceMeasure::from_code(bytes[8])
            .ok_or_else(|| Error::format(format!("unknown measure code {}", bytes[8])))?;
        let alpha = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let expected = n
            .checked_mul(n)
            .and_then(|c| c.checked_mul(8))
            .and_then(|c| c.checked_add(GTM_HEADER_LEN))
            .ok_or_else(|| Error::format("matrix order overflows"))?;
        if bytes.len() != expected {
            return Err(Error::format(format!(
                "expected {expected} bytes for n = {n}, found {}",
                bytes.len()
            )));
        }
        let distances = bytes[GTM_HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_parts(measure, alpha, distances, (0..n).collect())
    }

    /// Writes the binary file and its `.meta.json` sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        let meta = MatrixMeta {
            dataset: self.dataset_name.clone(),
            normalized_input: self.normalized_input,
            measure: self.measure,
            alpha: self.alpha,
            distance_scale: self.scale,
            ids: (!self.is_identity_map()).then(|| self.ids.clone()),
        };
        let mut json = serde_json::to_string_pretty(&meta)?;
        json.push('\n');
        std::fs::write(Self::meta_path(path), json)?;
        Ok(())
    }

    /// Reads a matrix file; the sidecar is applied when present.
    pub fn read(path: &Path) -> Result<Self> {
        let mut m = Self::from_bytes(&std::fs::read(path)?)?;
        let meta_path = Self::meta_path(path);
        if meta_path.exists() {
            let meta: MatrixMeta = serde_json::from_str(&std::fs::read_to_string(meta_path)?)?;
            if meta.measure != m.measure || meta.alpha.to_bits() != m.alpha.to_bits() {
                return Err(Error::format("sidecar disagrees with matrix header"));
            }
            m.dataset_name = meta.dataset;
            m.normalized_input = meta.normalized_input;
            m.scale = meta.distance_scale;
            if let Some(ids) = meta.ids {
                m.row_of = index_ids(&ids);
                m.ids = ids;
            }
            m.validate()?;
        }
        Ok(m)
    }
}
