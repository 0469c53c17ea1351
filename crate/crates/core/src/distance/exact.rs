use super::check_non_empty;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::Point;

/// Dynamic time warping with plain Euclidean point cost.
///
/// Rolls two rows over the shorter trajectory, so memory is O(min(n, m)).
/// The result is bit-identical for `dtw(a, b)` and `dtw(b, a)`.
pub fn dtw<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
    check_non_empty(a, b)?;
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let m = short.len();
    let inf = T::infinity();
    let mut prev = vec![inf; m];
    let mut cur = vec![inf; m];
    for (i, p) in long.iter().enumerate() {
        for (j, q) in short.iter().enumerate() {
            let cost = p.dist(q);
            cur[j] = if i == 0 && j == 0 {
                cost
            } else {
                let mut best = inf;
                if i > 0 {
                    best = prev[j];
                }
                if j > 0 {
                    best = best.min(cur[j - 1]);
                }
                if i > 0 && j > 0 {
                    best = best.min(prev[j - 1]);
                }
                cost + best
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Full DTW accumulation grid, kept for path reconstruction.
#[derive(Debug, Clone)]
pub struct DtwGrid<T> {
    rows: usize,
    cols: usize,
    acc: Vec<T>,
}

pub fn dtw_grid<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> Result<DtwGrid<T>> {
    check_non_empty(a, b)?;
    let (n, m) = (a.len(), b.len());
    let inf = T::infinity();
    let mut acc = vec![inf; n * m];
    for i in 0..n {
        for j in 0..m {
            let cost = a[i].dist(&b[j]);
            acc[i * m + j] = if i == 0 && j == 0 {
                cost
            } else {
                let mut best = inf;
                if i > 0 {
                    best = acc[(i - 1) * m + j];
                }
                if j > 0 {
                    best = best.min(acc[i * m + j - 1]);
                }
                if i > 0 && j > 0 {
                    best = best.min(acc[(i - 1) * m + j - 1]);
                }
                cost + best
            };
        }
    }
    Ok(DtwGrid { rows: n, cols: m, acc })
}

impl<T: Scalar> DtwGrid<T> {
    pub fn distance(&self) -> T {
        self.acc[self.rows * self.cols - 1]
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.acc[i * self.cols + j]
    }

    /// Optimal warping path from `(0, 0)` to `(n-1, m-1)`. Ties prefer the
    /// diagonal predecessor.
    pub fn path(&self) -> Vec<(usize, usize)> {
        let (mut i, mut j) = (self.rows - 1, self.cols - 1);
        let mut path = vec![(i, j)];
        while i > 0 || j > 0 {
            (i, j) = if i == 0 {
                (0, j - 1)
            } else if j == 0 {
                (i - 1, 0)
            } else {
                let diag = self.at(i - 1, j - 1);
                let up = self.at(i - 1, j);
                let left = self.at(i, j - 1);
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
        path
    }
}

/// Symmetric Hausdorff distance, naive O(n·m) scan.
pub fn hausdorff<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
    check_non_empty(a, b)?;
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

fn directed_hausdorff<T: Scalar>(from: &[Point<T>], to: &[Point<T>]) -> T {
    from.iter()
        .map(|p| to.iter().map(|q| p.dist(q)).fold(T::infinity(), T::min))
        .fold(T::zero(), T::max)
}

/// Discrete Fréchet distance, two-row dynamic program.
pub fn frechet_discrete<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
    check_non_empty(a, b)?;
    let m = b.len();
    let inf = T::infinity();
    let mut prev = vec![inf; m];
    let mut cur = vec![inf; m];
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let d = p.dist(q);
            cur[j] = if i == 0 && j == 0 {
                d
            } else {
                let mut best = inf;
                if i > 0 {
                    best = prev[j];
                }
                if j > 0 {
                    best = best.min(cur[j - 1]);
                }
                if i > 0 && j > 0 {
                    best = best.min(prev[j - 1]);
                }
                d.max(best)
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// `exp(-alpha * dist)`, in `(0, 1]`.
pub fn ground_truth_similarity(dist: f64, alpha: f64) -> Result<f64> {
    if !(dist >= 0.0) {
        return Err(Error::arg(format!("distance must be non-negative, got {dist}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha must be positive, got {alpha}")));
    }
    Ok((-alpha * dist).exp())
}
