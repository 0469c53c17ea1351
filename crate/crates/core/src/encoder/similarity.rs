//! Representation similarity functions and the measure-tailored selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMeasure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Added to the cosine denominator; all-zero vectors score 0.
pub const COSINE_STABILIZER: f64 = 1e-8;

/// A concrete representation similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    /// `exp(-‖u - w‖₂)`
    Euclidean,
    /// `u·w / (‖u‖‖w‖ + 1e-8)`
    Cosine,
    /// `exp(-max_k |u_k - w_k|)`
    Chebyshev,
}

/// Similarity choice as configured: fixed, or tailored to the target measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimFn {
    Euclidean,
    Cosine,
    Chebyshev,
    Tailored(DistanceMeasure),
}

/// DTW accumulates over the whole warping path and pairs with cosine;
/// Hausdorff and Fréchet are driven by a single worst pair and pair with
/// the Chebyshev-based similarity.
pub fn tailored_sim(measure: DistanceMeasure) -> Similarity {
    match measure {
        DistanceMeasure::Dtw => Similarity::Cosine,
        DistanceMeasure::Hausdorff | DistanceMeasure::Frechet => Similarity::Chebyshev,
    }
}

impl SimFn {
    pub fn resolve(self) -> Similarity {
        match self {
            SimFn::Euclidean => Similarity::Euclidean,
            SimFn::Cosine => Similarity::Cosine,
            SimFn::Chebyshev => Similarity::Chebyshev,
            SimFn::Tailored(m) => tailored_sim(m),
        }
    }

    /// Parses `euclidean|cosine|chebyshev|tailored`; `tailored` binds to
    /// `measure`.
    pub fn parse(s: &str, measure: DistanceMeasure) -> Result<Self> {
        match s {
            "tailored" => Ok(SimFn::Tailored(measure)),
            other => Ok(Similarity::from_str(other)?.into()),
        }
    }
}

impl From<Similarity> for SimFn {
    fn from(s: Similarity) -> Self {
        match s {
            Similarity::Euclidean => SimFn::Euclidean,
            Similarity::Cosine => SimFn::Cosine,
            Similarity::Chebyshev => SimFn::Chebyshev,
        }
    }
}

impl fmt::Display for SimFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimFn::Tailored(m) => write!(f, "tailored({m})"),
            other => write!(f, "{}", other.resolve()),
        }
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Similarity::Euclidean => "euclidean",
            Similarity::Cosine => "cosine",
            Similarity::Chebyshev => "chebyshev",
        })
    }
}

impl FromStr for Similarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Similarity::Euclidean),
            "cosine" => Ok(Similarity::Cosine),
            "chebyshev" => Ok(Similarity::Chebyshev),
            other => Err(Error::arg(format!("unknown similarity function `{other}`"))),
        }
    }
}

fn check_len<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "representations of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

pub fn sim_euclidean<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    check_len(a, b)?;
    Ok(Similarity::Euclidean.eval_unchecked(a, b))
}

pub fn sim_chebyshev<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    check_len(a, b)?;
    Ok(Similarity::Chebyshev.eval_unchecked(a, b))
}

pub fn sim_cosine<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    check_len(a, b)?;
    Ok(Similarity::Cosine.eval_unchecked(a, b))
}

fn norm<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

impl Similarity {
    pub fn eval<T: Scalar>(self, a: &[T], b: &[T]) -> Result<T> {
        check_len(a, b)?;
        Ok(self.eval_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn eval_unchecked<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        match self {
            Similarity::Euclidean => {
                let sq: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
                (-sq.sqrt()).exp()
            }
            Similarity::Chebyshev => {
                let m = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| (x - y).abs())
                    .fold(T::zero(), T::max);
                (-m).exp()
            }
            Similarity::Cosine => dot(a, b) / (norm(a) * norm(b) + T::of(COSINE_STABILIZER)),
        }
    }

    /// Which piece of the function is active: the first maximizing
    /// coordinate and its sign for Chebyshev, nothing for the smooth ones.
    pub fn regime<T: Scalar>(self, a: &[T], b: &[T]) -> Option<(usize, bool)> {
        match self {
            Similarity::Chebyshev => {
                let mut best: Option<(usize, T)> = None;
                for (k, (&x, &y)) in a.iter().zip(b).enumerate() {
                    if best.is_none_or(|(_, m)| (x - y).abs() > m) {
                        best = Some((k, (x - y).abs()));
                    }
                }
                best.map(|(k, _)| (k, a[k] >= b[k]))
            }
            _ => None,
        }
    }

    /// Value and gradients with respect to both arguments.
    ///
    /// At the non-differentiable points (coincident vectors for Euclidean,
    /// a zero vector for cosine) the corresponding gradient term is 0; for
    /// Chebyshev ties the first maximizing coordinate carries the gradient.
    pub fn eval_with_grad<T: Scalar>(self, a: &[T], b: &[T]) -> Result<(T, Vec<T>, Vec<T>)> {
        check_len(a, b)?;
        let d = a.len();
        let mut ga = vec![T::zero(); d];
        let mut gb = vec![T::zero(); d];
        let s = self.eval_unchecked(a, b);
        match self {
            Similarity::Euclidean => {
                let dist = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt();
                if dist > T::zero() {
                    for k in 0..d {
                        let g = -s * (a[k] - b[k]) / dist;
                        ga[k] = g;
                        gb[k] = -g;
                    }
                }
            }
            Similarity::Chebyshev => {
                let mut best = T::zero();
                let mut arg = None;
                for k in 0..d {
                    let v = (a[k] - b[k]).abs();
                    if arg.is_none() || v > best {
                        best = v;
                        arg = Some(k);
                    }
                }
                if let Some(k) = arg {
                    let diff = a[k] - b[k];
                    if diff != T::zero() {
                        let g = -s * diff.signum();
                        ga[k] = g;
                        gb[k] = -g;
                    }
                }
            }
            Similarity::Cosine => {
                let na = norm(a);
                let nb = norm(b);
                let denom = na * nb + T::of(COSINE_STABILIZER);
                let p = dot(a, b);
                for k in 0..d {
                    let mut g1 = b[k] / denom;
                    let mut g2 = a[k] / denom;
                    let coeff = p / (denom * denom);
                    if na > T::zero() {
                        g1 -= coeff * nb * a[k] / na;
                    }
                    if nb > T::zero() {
                        g2 -= coeff * na * b[k] / nb;
                    }
                    ga[k] = g1;
                    gb[k] = g2;
                }
            }
        }
        Ok((s, ga, gb))
    }
}
