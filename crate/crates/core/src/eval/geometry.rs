use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn check(dim: usize, r: f64) -> Result<()> {
    if dim == 0 || !(r > 0.0) || !r.is_finite() {
        return Err(Error::arg(format!("need dim >= 1 and finite r > 0, got dim = {dim}, r = {r}")));
    }
    Ok(())
}

/// Surface area of the radius-`r` ball in `dim` dimensions,
/// `2π^{d/2} / Γ(d/2) · r^{d-1}`.
pub fn hyperball_area(dim: usize, r: f64) -> Result<f64> {
    check(dim, r)?;
    let d = dim as f64;
    let ln = 2f64.ln() + 0.5 * d * PI.ln() - ln_gamma(0.5 * d) + (d - 1.0) * r.ln();
    Ok(ln.exp())
}

/// Surface area of the cube of side `2r`: `d · 2^d · r^{d-1}`.
pub fn hypercube_area(dim: usize, r: f64) -> Result<f64> {
    check(dim, r)?;
    let d = dim as f64;
    Ok(d * 2f64.powi(dim as i32) * r.powf(d - 1.0))
}

/// `log10` of the ball-to-cube surface ratio; independent of `r`.
pub fn log10_surface_ratio(dim: usize) -> Result<f64> {
    check(dim, 1.0)?;
    let d = dim as f64;
    let ln = 2f64.ln() + 0.5 * d * PI.ln() - ln_gamma(0.5 * d) - d.ln() - d * 2f64.ln();
    Ok(ln / 10f64.ln())
}

/// Ball-to-cube surface ratio. Underflows to 0 in high dimension; use
/// [`log10_surface_ratio`] there.
pub fn surface_ratio(dim: usize) -> Result<f64> {
    check(dim, 1.0)?;
    let d = dim as f64;
    let ln = 2f64.ln() + 0.5 * d * PI.ln() - ln_gamma(0.5 * d) - d.ln() - d * 2f64.ln();
    Ok(ln.exp())
}
