use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Point, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Standard deviation of each random-walk step, in unit-square units.
pub const SYNTHETIC_STEP_SCALE: f64 = 0.02;

/// Seeded 2-D random walks starting uniformly in the unit square.
pub fn generate_synthetic(count: usize, len_min: usize, len_max: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::arg("count must be at least 1"));
    }
    if len_min == 0 || len_min > len_max {
        return Err(Error::arg(format!(
            "invalid length range [{len_min}, {len_max}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = Normal::new(0.0, SYNTHETIC_STEP_SCALE).expect("positive scale");
    let trajectories = (0..count)
        .map(|id| {
            let n = rng.random_range(len_min..=len_max);
            let mut p = Point::new(rng.random::<f64>(), rng.random::<f64>());
            let mut points = Vec::with_capacity(n);
            points.push(p);
            for _ in 1..n {
                p = Point::new(p.lon + step.sample(&mut rng), p.lat + step.sample(&mut rng));
                points.push(p);
            }
            Trajectory::new(id, points)
        })
        .collect();
    Ok(Dataset::new(format!("synthetic-{seed}"), trajectories))
}

/// Appends a noisy duplicate of every trajectory (i.i.d. Gaussian noise on
/// each coordinate). Duplicates get ids after the originals.
pub fn augment_noise<T: Scalar>(d: &Dataset<T>, sigma: f64, seed: u64) -> Result<Dataset<T>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!("sigma must be a finite non-negative number, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("validated sigma");
    let mut out = d.clone();
    for t in &d.trajectories {
        let mut dup = t.clone();
        for p in &mut dup.points {
            p.lon += T::of(noise.sample(&mut rng));
            p.lat += T::of(noise.sample(&mut rng));
        }
        out.trajectories.push(dup);
    }
    out.renumber();
    Ok(out)
}
