use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::topk::topk_repr;
use crate::distance::{fast_dtw, greedy_frechet, hausdorff_early_break, DistanceMeasure, FastDtwConfig};
use crate::encoder::{Representation, Similarity, SimformerModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::{Dataset, Point};

/// How a top-k query is answered.
pub enum BenchMethod<'a, T: Scalar> {
    /// Exact distance to every trajectory.
    BruteExact(DistanceMeasure),
    /// Approximate distance to every trajectory (FastDTW, early-break
    /// Hausdorff or greedy Fréchet).
    NonLearning(DistanceMeasure),
    /// Encode the query, then scan precomputed representations.
    Learned {
        model: &'a SimformerModel<T>,
        reps: &'a [Representation<T>],
        sim: Similarity,
    },
}

impl<T: Scalar> BenchMethod<'_, T> {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::BruteExact(_) => "brute",
            BenchMethod::NonLearning(_) => "nonlearning",
            BenchMethod::Learned { .. } => "learned",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub query_ids: Vec<usize>,
    pub times_ms: Vec<f64>,
    pub mean_ms: f64,
    pub std_ms: f64,
}

fn approx_distance<T: Scalar>(m: DistanceMeasure, a: &[Point<T>], b: &[Point<T>], seed: u64) -> Result<T> {
    match m {
        DistanceMeasure::Dtw => fast_dtw(a, b, FastDtwConfig::default()),
        DistanceMeasure::Hausdorff => hausdorff_early_break(a, b, seed),
        DistanceMeasure::Frechet => greedy_frechet(a, b),
    }
}

fn scan_distances<T: Scalar>(
    dataset: &Dataset<T>,
    q: usize,
    k: usize,
    dist: impl Fn(&[Point<T>], &[Point<T>]) -> Result<T>,
) -> Result<Vec<usize>> {
    let query = &dataset.trajectories[q].points;
    let mut items = Vec::with_capacity(dataset.len());
    for t in &dataset.trajectories {
        if t.id != q {
            items.push((dist(query, &t.points)?.as_f64(), t.id));
        }
    }
    items.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(items.into_iter().take(k).map(|(_, id)| id).collect())
}

/// Times `query_count` seeded top-k queries drawn from `dataset`, run one
/// after another. Learned timings include encoding the query.
pub fn benchmark_query<T: Scalar>(
    dataset: &Dataset<T>,
    method: &BenchMethod<'_, T>,
    k: usize,
    query_count: usize,
    seed: u64,
) -> Result<BenchReport> {
    let n = dataset.len();
    if query_count > 0 && k >= n {
        return Err(Error::arg(format!("k = {k} needs more than {n} trajectories")));
    }
    if let BenchMethod::Learned { reps, .. } = method {
        if reps.len() != n {
            return Err(Error::arg("one representation per trajectory is required"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let query_ids: Vec<usize> = (0..query_count).map(|_| rng.random_range(0..n.max(1))).collect();
    let ids: Vec<usize> = (0..n).collect();
    let mut times_ms = Vec::with_capacity(query_count);
    for &q in &query_ids {
        let start = Instant::now();
        let hits = match method {
            BenchMethod::BruteExact(m) => scan_distances(dataset, q, k, |a, b| m.distance(a, b))?,
            BenchMethod::NonLearning(m) => scan_distances(dataset, q, k, |a, b| approx_distance(*m, a, b, seed))?,
            BenchMethod::Learned { model, reps, sim } => {
                let rep = model.encode(&dataset.trajectories[q].points)?;
                topk_repr(&ids, reps, &rep, *sim, k, Some(q))?.neighbor_ids
            }
        };
        times_ms.push(start.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(hits);
    }
    let (mean_ms, std_ms) = if times_ms.is_empty() {
        (0.0, 0.0)
    } else {
        let m = times_ms.iter().sum::<f64>() / times_ms.len() as f64;
        let v = times_ms.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / times_ms.len() as f64;
        (m, v.sqrt())
    };
    Ok(BenchReport {
        method: method.name().to_string(),
        n,
        k,
        query_ids,
        times_ms,
        mean_ms,
        std_ms,
    })
}

/// CSV with header `method,n,k,mean_ms,std_ms`.
pub fn write_bench_csv<W: Write>(mut w: W, reports: &[BenchReport]) -> Result<()> {
    writeln!(w, "method,n,k,mean_ms,std_ms")?;
    for r in reports {
        writeln!(w, "{},{},{},{:.6},{:.6}", r.method, r.n, r.k, r.mean_ms, r.std_ms)?;
    }
    Ok(())
}
