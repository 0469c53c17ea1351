//! Brute-force reference implementations shared by the test suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajsim_core::Point;

/// Visits every monotone warping path from (0, 0) to (n-1, m-1), summing
/// costs in path order, and returns the minimum.
pub fn dtw_by_paths(a: &[Point], b: &[Point]) -> f64 {
    fn walk(a: &[Point], b: &[Point], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + a[i].dist(&b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Minimum over every coupling of the largest coupled distance.
pub fn frechet_by_couplings(a: &[Point], b: &[Point]) -> f64 {
    fn walk(a: &[Point], b: &[Point], i: usize, j: usize, worst: f64, best: &mut f64) {
        let worst = worst.max(a[i].dist(&b[j]));
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(worst);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, worst, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, worst, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Definition-level Hausdorff distance.
pub fn hausdorff_by_definition(a: &[Point], b: &[Point]) -> f64 {
    let directed = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.dist(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Uniform points in the unit square, length uniform in `1..=max_len`.
pub fn random_traj(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Point> {
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| Point::new(rng.random(), rng.random())).collect()
}

/// A random walk of length uniform in `1..=max_len`.
pub fn random_walk(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Point> {
    let n = rng.random_range(1..=max_len);
    let mut p = Point::new(rng.random::<f64>(), rng.random::<f64>());
    (0..n)
        .map(|_| {
            p = Point::new(p.lon + rng.random_range(-0.05..0.05), p.lat + rng.random_range(-0.05..0.05));
            p
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
