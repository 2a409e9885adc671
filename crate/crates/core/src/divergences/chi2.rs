use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;

use super::functions::StandardMonotoneFn;
use super::{DivergenceDiagnostics, DivergenceValue};

fn check_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    sigma.require_full_rank()
}

/// Weights `g(μ_i/μ_j)/μ_j` on the matrix units of the σ eigenbasis, in column-stacked
/// order (`i + j·d`).
pub fn chi2_weights(sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<Vec<f64>> {
    sigma.require_full_rank()?;
    let mu = sigma.eigenvalues();
    let d = mu.len();
    let mut w = vec![0.0; d * d];
    for j in 0..d {
        for i in 0..d {
            w[i + j * d] = g.eval(mu[i] / mu[j]) / mu[j];
        }
    }
    Ok(w)
}

/// `χ²_g(ρ‖σ) = Σ_ij g(μ_i/μ_j)/μ_j · |X_ij|²` with `X = ρ − σ` in the eigenbasis of σ.
pub fn chi2_g(rho: &DensityMatrix, sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let w = chi2_weights(sigma, g)?;
    let v = &sigma.spectrum().vectors;
    let x = v.adjoint() * (rho.matrix() - sigma.matrix()) * v;
    let d = sigma.dim();
    let mut sum = 0.0;
    for j in 0..d {
        for i in 0..d {
            sum += w[i + j * d] * x[(i, j)].norm_sqr();
        }
    }
    Ok(DivergenceValue::new(sum, diagnostics(rho, sigma)))
}

/// `χ²_max(ρ‖σ) = Tr[σ^{-1}(ρ − σ)²]`.
pub fn chi2_max(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let inv = sigma.power(-1.0)?;
    let x = rho.matrix() - sigma.matrix();
    let value = (inv * &x * &x).trace().re;
    Ok(DivergenceValue::new(value, diagnostics(rho, sigma)))
}

fn diagnostics(rho: &DensityMatrix, sigma: &DensityMatrix) -> DivergenceDiagnostics {
    DivergenceDiagnostics {
        rho_full_rank: rho.is_full_rank(),
        sigma_full_rank: sigma.is_full_rank(),
        ..Default::default()
    }
}
