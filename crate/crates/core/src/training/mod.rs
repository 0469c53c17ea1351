//! Siamese training of the encoder against a ground-truth matrix.

mod pairs;
mod trainer;

pub use pairs::{sample_pairs, PairSample};
pub use trainer::{batch_loss_and_grad, batch_regime, mse_loss, train, write_history_csv, EpochRecord, TrainConfig, TrainOutcome};

pub use crate::encoder::{load_checkpoint, save_checkpoint, CheckpointHeader};
