//! The trajectory encoder: point embedding, learnable positional table,
//! post-norm transformer layers, mean pooling and ReLU.

mod checkpoint;
mod model;
mod similarity;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMeasure;
use crate::error::{Error, Result};

pub use checkpoint::{
    checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint, CheckpointHeader, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use model::{EncodeCache, EncoderLayer, Representation, SimformerModel};
pub use similarity::{
    sim_chebyshev, sim_cosine, sim_euclidean, tailored_sim, SimFn, Similarity, COSINE_STABILIZER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimformerConfig {
    /// Embedding width.
    pub d: usize,
    pub heads: usize,
    pub layers: usize,
    /// Hidden width of the feed-forward sublayer.
    pub d_ff: usize,
    /// Rows of the positional table; longer trajectories are rejected.
    pub max_len: usize,
    pub sim_fn: SimFn,
}

impl Default for SimformerConfig {
    fn default() -> Self {
        Self::with_width(128, 16)
    }
}

impl SimformerConfig {
    /// Defaults with a given width and head count (`d_ff = 4·d`).
    pub fn with_width(d: usize, heads: usize) -> Self {
        SimformerConfig {
            d,
            heads,
            layers: 1,
            d_ff: 4 * d,
            max_len: 200,
            sim_fn: SimFn::Tailored(DistanceMeasure::Dtw),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.heads == 0 || !self.d.is_multiple_of(self.heads) {
            return Err(Error::Config(format!(
                "width {} must be a positive multiple of heads {}",
                self.d, self.heads
            )));
        }
        if !(1..=4).contains(&self.layers) {
            return Err(Error::Config(format!("layers must be in 1..=4, got {}", self.layers)));
        }
        if self.d_ff == 0 || self.max_len == 0 {
            return Err(Error::Config("d_ff and max_len must be positive".into()));
        }
        Ok(())
    }
}
