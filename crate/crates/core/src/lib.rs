//! Trajectory similarity: exact free-space distances, fast non-learning
//! baselines, and a single-layer transformer encoder trained to approximate
//! them with measure-tailored representation similarity.

pub mod distance;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod numeric;
pub mod scalar;
pub mod training;
pub mod trajectory;

pub use distance::{DistanceMeasure, GroundTruthMatrix};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use trajectory::{Dataset, NormStats, Point, SplitSpec, Trajectory};

pub type Matrix64 = numeric::Matrix<f64>;
pub type Matrix32 = numeric::Matrix<f32>;
pub type Model64 = encoder::SimformerModel<f64>;
pub type Model32 = encoder::SimformerModel<f32>;
pub type Representation64 = encoder::Representation<f64>;
pub type Representation32 = encoder::Representation<f32>;
