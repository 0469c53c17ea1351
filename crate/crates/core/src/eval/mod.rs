//! Top-k search, ranking metrics, representation statistics and the
//! surface-area analysis of the similarity functions' solution spaces.

mod bench;
mod geometry;
mod metrics;
mod stats;
mod topk;

pub use bench::{benchmark_query, write_bench_csv, BenchMethod, BenchReport};
pub use geometry::{hyperball_area, hypercube_area, log10_surface_ratio, surface_ratio};
pub use metrics::{
    approximation_mse, evaluate, hr_at_k, inversions_at_k, mse, recall_t_at_k, EvalConfig, MetricsReport,
};
pub use stats::{concentration_stats, similarity_histogram, ConcentrationStats};
pub use topk::{topk_ground_truth, topk_ground_truth_among, topk_repr, QueryResult};
