//! Non-learning fast baselines: multi-resolution DTW, greedy discrete
//! Fréchet, and early-break Hausdorff.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check_non_empty;
use super::exact::dtw;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::trajectory::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastDtwConfig {
    /// Half-width of the search window around the projected path.
    pub radius: usize,
}

impl Default for FastDtwConfig {
    fn default() -> Self {
        FastDtwConfig { radius: 1 }
    }
}

/// Averages adjacent pairs; an odd tail point is carried unchanged.
fn coarsen<T: Scalar>(pts: &[Point<T>]) -> Vec<Point<T>> {
    let half = T::of(0.5);
    pts.chunks(2)
        .map(|c| match c {
            [p, q] => Point::new((p.lon + q.lon) * half, (p.lat + q.lat) * half),
            [p] => *p,
            _ => unreachable!(),
        })
        .collect()
}

/// Per-row inclusive column interval `[lo, hi]`.
type Window = Vec<(usize, usize)>;

/// Multi-resolution DTW approximation.
///
/// Both inputs are halved until one of them fits in `radius + 2` points, the
/// coarsest level is solved exactly, and at each finer level the projected
/// path, widened by `radius`, bounds a constrained DTW. The returned cost is
/// that of a valid warping path, so it never undercuts [`dtw`].
pub fn fast_dtw<T: Scalar>(a: &[Point<T>], b: &[Point<T>], cfg: FastDtwConfig) -> Result<T> {
    check_non_empty(a, b)?;
    let min_size = cfg.radius + 2;
    if a.len() <= min_size || b.len() <= min_size {
        return dtw(a, b);
    }
    Ok(fast_dtw_path(a, b, cfg.radius).0)
}

fn fast_dtw_path<T: Scalar>(a: &[Point<T>], b: &[Point<T>], radius: usize) -> (T, Vec<(usize, usize)>) {
    let min_size = radius + 2;
    if a.len() <= min_size || b.len() <= min_size {
        let full = vec![(0, b.len() - 1); a.len()];
        return windowed_dtw(a, b, &full);
    }
    let ca = coarsen(a);
    let cb = coarsen(b);
    let (_, coarse_path) = fast_dtw_path(&ca, &cb, radius);
    let window = expand_window(&coarse_path, ca.len(), cb.len(), radius, a.len(), b.len());
    windowed_dtw(a, b, &window)
}

/// Widens a coarse path by `radius` cells and projects it to the finer grid.
fn expand_window(
    coarse: &[(usize, usize)],
    coarse_rows: usize,
    coarse_cols: usize,
    radius: usize,
    rows: usize,
    cols: usize,
) -> Window {
    let mut coarse_win = vec![(usize::MAX, 0usize); coarse_rows];
    for &(i, j) in coarse {
        let lo_i = i.saturating_sub(radius);
        let hi_i = (i + radius).min(coarse_rows - 1);
        let lo_j = j.saturating_sub(radius);
        let hi_j = (j + radius).min(coarse_cols - 1);
        for w in &mut coarse_win[lo_i..=hi_i] {
            w.0 = w.0.min(lo_j);
            w.1 = w.1.max(hi_j);
        }
    }
    let mut window = vec![(usize::MAX, 0usize); rows];
    for (ci, &(lo, hi)) in coarse_win.iter().enumerate() {
        for r in [2 * ci, 2 * ci + 1] {
            if r < rows {
                window[r].0 = window[r].0.min(2 * lo);
                window[r].1 = window[r].1.max((2 * hi + 1).min(cols - 1));
            }
        }
    }
    window
}

/// DTW restricted to `window`, returning cost and optimal path.
fn windowed_dtw<T: Scalar>(a: &[Point<T>], b: &[Point<T>], window: &Window) -> (T, Vec<(usize, usize)>) {
    let inf = T::infinity();
    let mut acc: Vec<Vec<T>> = Vec::with_capacity(a.len());
    let lookup = |acc: &Vec<Vec<T>>, i: usize, j: usize| -> T {
        let (lo, hi) = window[i];
        if j < lo || j > hi {
            inf
        } else {
            acc[i][j - lo]
        }
    };
    for (i, p) in a.iter().enumerate() {
        let (lo, hi) = window[i];
        let mut row = Vec::with_capacity(hi - lo + 1);
        for j in lo..=hi {
            let cost = p.dist(&b[j]);
            let v = if i == 0 && j == 0 {
                cost
            } else {
                let mut best = inf;
                if i > 0 {
                    best = lookup(&acc, i - 1, j);
                }
                if j > lo {
                    best = best.min(row[j - lo - 1]);
                }
                if i > 0 && j > 0 {
                    best = best.min(lookup(&acc, i - 1, j - 1));
                }
                cost + best
            };
            row.push(v);
        }
        acc.push(row);
    }
    let (n, m) = (a.len(), b.len());
    let cost = lookup(&acc, n - 1, m - 1);
    let (mut i, mut j) = (n - 1, m - 1);
    let mut path = vec![(i, j)];
    while i > 0 || j > 0 {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = lookup(&acc, i - 1, j - 1);
            let up = lookup(&acc, i - 1, j);
            let left = lookup(&acc, i, j - 1);
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    (cost, path)
}

/// Greedy discrete Fréchet: walk from `(0, 0)` to the end always taking the
/// move with the smallest next pair distance. Ties prefer the diagonal, then
/// the side with more points remaining.
pub fn greedy_frechet<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
    check_non_empty(a, b)?;
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut worst = a[0].dist(&b[0]);
    while i + 1 < n || j + 1 < m {
        let diag = (i + 1 < n && j + 1 < m).then(|| a[i + 1].dist(&b[j + 1]));
        let down = (i + 1 < n).then(|| a[i + 1].dist(&b[j]));
        let right = (j + 1 < m).then(|| a[i].dist(&b[j + 1]));
        // The side with more remaining points goes first among equal steps.
        let a_first = n - i >= m - j;
        let candidates = if a_first {
            [(diag, (i + 1, j + 1)), (down, (i + 1, j)), (right, (i, j + 1))]
        } else {
            [(diag, (i + 1, j + 1)), (right, (i, j + 1)), (down, (i + 1, j))]
        };
        let (d, next) = candidates
            .into_iter()
            .filter_map(|(d, next)| d.map(|d| (d, next)))
            .fold(None, |best: Option<(T, (usize, usize))>, cand| match best {
                Some(b) if b.0 <= cand.0 => Some(b),
                _ => Some(cand),
            })
            .expect("at least one move remains");
        worst = worst.max(d);
        (i, j) = next;
    }
    Ok(worst)
}

/// Exact Hausdorff distance with randomized order and early break.
pub fn hausdorff_early_break<T: Scalar>(a: &[Point<T>], b: &[Point<T>], seed: u64) -> Result<T> {
    hausdorff_early_break_counted(a, b, seed).map(|(d, _)| d)
}

/// As [`hausdorff_early_break`], also returning how many point distances
/// were evaluated (the naive scan evaluates `2·n·m`).
pub fn hausdorff_early_break_counted<T: Scalar>(
    a: &[Point<T>],
    b: &[Point<T>],
    seed: u64,
) -> Result<(T, usize)> {
    check_non_empty(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order_a: Vec<usize> = (0..a.len()).collect();
    let mut order_b: Vec<usize> = (0..b.len()).collect();
    order_a.shuffle(&mut rng);
    order_b.shuffle(&mut rng);
    let mut evaluated = 0;
    let ab = directed_early_break(a, &order_a, b, &order_b, &mut evaluated);
    let ba = directed_early_break(b, &order_b, a, &order_a, &mut evaluated);
    Ok((ab.max(ba), evaluated))
}

fn directed_early_break<T: Scalar>(
    from: &[Point<T>],
    from_order: &[usize],
    to: &[Point<T>],
    to_order: &[usize],
    evaluated: &mut usize,
) -> T {
    let mut cmax = T::zero();
    for &i in from_order {
        let mut cmin = T::infinity();
        let mut broke = false;
        for &j in to_order {
            *evaluated += 1;
            let d = from[i].dist(&to[j]);
            if d < cmax {
                broke = true;
                break;
            }
            if d < cmin {
                cmin = d;
            }
        }
        if !broke && cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}
