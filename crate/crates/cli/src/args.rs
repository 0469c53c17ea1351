use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use trajsim_core::distance::DistanceMeasure;

#[derive(Debug, Parser)]
#[command(name = "trajsim", version, about = "Trajectory similarity: exact distances, baselines and a learned encoder")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic random-walk trajectories.
    Gen(GenArgs),
    /// Filter by length and bounding box, optionally normalize.
    Preprocess(PreprocessArgs),
    /// Compute the pairwise ground-truth distance matrix.
    Gt(GtArgs),
    /// Train the encoder against a ground-truth matrix.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test split.
    Eval(EvalArgs),
    /// Time top-k queries for brute-force, non-learning and learned search.
    Bench(BenchArgs),
    /// Analytics: surface ratio, concentration, histograms, attention.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Dtw,
    Hausdorff,
    Frechet,
}

impl From<Measure> for DistanceMeasure {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Dtw => DistanceMeasure::Dtw,
            Measure::Hausdorff => DistanceMeasure::Hausdorff,
            Measure::Frechet => DistanceMeasure::Frechet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 10)]
    pub len_min: usize,
    #[arg(long, default_value_t = 200)]
    pub len_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `.jsonl` selects JSON lines, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    #[arg(long, default_value_t = 200)]
    pub max_len: usize,
    /// `lon_min,lon_max,lat_min,lat_max`
    #[arg(long)]
    pub bbox: Option<String>,
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GtArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub measure: Measure,
    /// `auto` (16 for DTW, 8 otherwise) or a positive number.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Divide distances by the largest one (`max`) before `exp(-alpha·d)`.
    #[arg(long, default_value = "max")]
    pub scale: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// `euclidean`, `cosine`, `chebyshev` or `tailored`.
    #[arg(long, default_value = "tailored")]
    pub sim: String,
    #[arg(long, default_value_t = 128)]
    pub d: usize,
    #[arg(long, default_value_t = 16)]
    pub heads: usize,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 200)]
    pub max_len: usize,
    #[arg(long, default_value_t = 5e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 20)]
    pub batch: usize,
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 20)]
    pub patience: usize,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
    #[arg(long)]
    pub out_ckpt: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Split file written by `train`; defaults to `<ckpt>.split.json`.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value = "1,10,50,100")]
    pub k: String,
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    #[arg(long, default_value = "10,20,50,100")]
    pub inv_k: String,
    /// `all` or a number of test queries.
    #[arg(long, default_value = "all")]
    pub queries: String,
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub measure: Measure,
    #[arg(long, default_value = "brute,nonlearning,learned")]
    pub methods: String,
    #[arg(long, default_value = "1k,5k,10k")]
    pub sizes: String,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyzeMode {
    Ratio,
    Concentration,
    Histogram,
    Attention,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub mode: AnalyzeMode,
    #[arg(long)]
    pub out: PathBuf,
    /// Ratio mode: smallest dimension.
    #[arg(long, default_value_t = 1)]
    pub d_min: usize,
    /// Ratio mode: largest dimension.
    #[arg(long, default_value_t = 256)]
    pub d_max: usize,
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Histogram mode: number of bins over [0, 1].
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Attention mode: trajectory id.
    #[arg(long)]
    pub id: Option<usize>,
}
