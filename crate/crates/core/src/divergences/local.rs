use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sandwiched_ratio, DensityMatrix};

pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.08, 0.04, 0.02, 0.01, 0.005];
/// Target for `λ_max·‖σ^{-1/2}ρσ^{-1/2} − I‖_∞` in [`scaled_lambda_grid`].
const GRID_REACH: f64 = 0.1;

/// Shrinks `base` so that the largest λ keeps `λ(T − I)` small, `T = σ^{-1/2}ρσ^{-1/2}`.
///
/// `λ ↦ D(λρ + (1−λ)σ‖σ)/λ²` is analytic only while `1 + λ(t − 1)` stays away from 0 for
/// every eigenvalue t of T; a nearly singular σ pushes that radius far below the default grid.
pub fn scaled_lambda_grid(rho: &DensityMatrix, sigma: &DensityMatrix, base: &[f64]) -> Result<Vec<f64>> {
    let t = sandwiched_ratio(rho, sigma)?.eigenvalues()?;
    let spread = t.iter().map(|x| (x - 1.0).abs()).fold(0.0f64, f64::max);
    let top = base.first().copied().unwrap_or(1.0);
    let scale = if spread * top > GRID_REACH { GRID_REACH / (spread * top) } else { 1.0 };
    Ok(base.iter().map(|l| l * scale).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalChi2Estimate {
    /// Extrapolated `lim_{λ→0} D_f(λρ + (1−λ)σ‖σ)/λ²`.
    pub limit: f64,
    /// Difference between the two highest-order extrapolants.
    pub residual: f64,
    /// `(λ, D_f/λ²)` samples.
    pub samples: Vec<(f64, f64)>,
}

/// Neville extrapolation of the interpolating polynomial through `(xs, ys)` to `x = 0`.
/// Returns the full-order value and its distance to the best estimate one order lower.
pub fn richardson_to_zero(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InvalidInput(format!("need matching abscissae and values, got {} and {}", n, ys.len())));
    }
    let mut p = ys.to_vec();
    let mut previous = (p[n - 2], p[n - 1]);
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (xb * p[i] - xa * p[i + 1]) / (xb - xa);
        }
        if level == n - 2 {
            previous = (p[0], p[1]);
        }
    }
    let limit = p[0];
    // the lower-order estimate built on the smaller abscissae is the more accurate one
    let lower = if n > 2 { previous.1 } else { ys[n - 1] };
    Ok((limit, (limit - lower).abs()))
}

/// Samples `D(λρ + (1−λ)σ‖σ)/λ²` on a descending grid in (0, 1) and extrapolates to λ = 0.
pub fn local_chi2_estimate<F>(evaluator: F, rho: &DensityMatrix, sigma: &DensityMatrix, grid: &[f64]) -> Result<LocalChi2Estimate>
where
    F: Fn(&DensityMatrix, &DensityMatrix) -> Result<f64>,
{
    if grid.len() < 4 {
        return Err(Error::InvalidInput(format!("lambda grid needs at least 4 points, got {}", grid.len())));
    }
    if grid.iter().any(|&l| !(l > 0.0 && l < 1.0)) || grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("lambda grid must be strictly descending inside (0, 1)".into()));
    }
    sigma.require_full_rank()?;
    let mut samples = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let mixed = rho.mix(sigma, lambda)?;
        samples.push((lambda, evaluator(&mixed, sigma)? / (lambda * lambda)));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let (limit, residual) = richardson_to_zero(&xs, &ys)?;
    Ok(LocalChi2Estimate { limit, residual, samples })
}
