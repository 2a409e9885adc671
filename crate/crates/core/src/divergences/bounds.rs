use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermitian_schatten, sandwiched_ratio, DensityMatrix, HermitianMatrix, SchattenOrder};

use super::chi2::chi2_weights;
use super::functions::{FDivergenceSpec, StandardMonotoneFn};

/// Below this distance from 1 the ratios `f(m)/(1−m)` and `f(M)/(M−1)` use their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-8;
const APPLICABILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversePinsker {
    pub bound: f64,
    /// Whether `|ρ − σ| ≤ ρ + σ`, the hypothesis under which `bound` is valid.
    pub applicable: bool,
    pub m: f64,
    pub big_m: f64,
    pub trace_norm: f64,
}

fn lower_ratio(spec: &FDivergenceSpec, m: f64) -> f64 {
    let u = 1.0 - m;
    if u.abs() < SERIES_THRESHOLD {
        spec.f2(1.0) * u / 2.0 - spec.f3(1.0) * u * u / 6.0
    } else {
        spec.f(m) / u
    }
}

fn upper_ratio(spec: &FDivergenceSpec, big_m: f64) -> f64 {
    let u = big_m - 1.0;
    if u.abs() < SERIES_THRESHOLD {
        spec.f2(1.0) * u / 2.0 + spec.f3(1.0) * u * u / 6.0
    } else {
        spec.f(big_m) / u
    }
}

/// `(‖ρ−σ‖₁/2)·(f(m)/(1−m) + f(M)/(M−1))` where `m, M` are the extreme eigenvalues of
/// `σ^{-1/2}ρσ^{-1/2}`.
pub fn reverse_pinsker_bound(spec: &FDivergenceSpec, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ReversePinsker> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    sigma.require_full_rank()?;
    let t = sandwiched_ratio(rho, sigma)?.eigenvalues()?;
    let m = t[0].max(0.0);
    let big_m = t[t.len() - 1];
    let diff = rho.matrix() - sigma.matrix();
    let trace_norm = hermitian_schatten(&diff, SchattenOrder::One)?;
    let bound = 0.5 * trace_norm * (lower_ratio(spec, m) + upper_ratio(spec, big_m));
    if !bound.is_finite() {
        return Err(Error::DomainError(m));
    }
    let abs_diff = hermitian_eig(&HermitianMatrix::hermitian_part(&diff)?)?.map(f64::abs)?;
    let gap = rho.matrix() + sigma.matrix() - abs_diff;
    let lowest = HermitianMatrix::hermitian_part(&gap)?.eigenvalues()?[0];
    Ok(ReversePinsker { bound, applicable: lowest >= -APPLICABILITY_TOL, m, big_m, trace_norm })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalPinskerConstant {
    /// `C` in `D_f(ρ‖σ) ≤ C‖ρ−σ‖₁²`.
    pub constant: f64,
    /// The bound holds whenever `‖ρ−σ‖_∞ < radius`.
    pub radius: f64,
    pub epsilon: f64,
    pub third_derivative_bound: f64,
}

/// Taylor constant for the local reverse Pinsker inequality around σ.
///
/// Inside the radius `M − 1` and `1 − m` are at most `x = ‖ρ−σ‖_∞/λ_min(σ) < ε/2`, so
/// expanding `f(m)/(1−m) + f(M)/(M−1)` to third order with `C₃ = max|f'''|` on
/// `[1−ε/2, 1+ε/2]` and using `x ≤ ‖ρ−σ‖₁/λ_min` gives
/// `C = f''(1)/(2λ_min) + C₃ε/(12λ_min)`. The same constant also follows from
/// `D_f ≤ Tr[σ f(σ^{-1/2}ρσ^{-1/2})]`, so it does not rely on the general reverse-Pinsker
/// bound holding for the family at hand.
pub fn local_reverse_pinsker_constant(
    spec: &FDivergenceSpec,
    sigma: &DensityMatrix,
    epsilon: f64,
) -> Result<LocalPinskerConstant> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("epsilon {epsilon} outside (0, 1)")));
    }
    sigma.require_full_rank()?;
    let lam = sigma.min_eigenvalue();
    const SAMPLES: usize = 2001;
    let c3 = (0..SAMPLES)
        .map(|k| 1.0 - epsilon / 2.0 + epsilon * k as f64 / (SAMPLES - 1) as f64)
        .map(|x| spec.f3(x).abs())
        .fold(0.0f64, f64::max);
    let constant = (spec.f2(1.0) / 2.0 + c3 * epsilon / 12.0) / lam;
    Ok(LocalPinskerConstant { constant, radius: epsilon * lam / 2.0, epsilon, third_derivative_bound: c3 })
}

/// `c = min_ij g(μ_i/μ_j)/(μ_j d)`, so that `χ²_g(ρ‖σ) ≥ c‖ρ−σ‖₁²`.
pub fn chi2_lower_constant(sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<f64> {
    let w = chi2_weights(sigma, g)?;
    Ok(w.iter().copied().fold(f64::INFINITY, f64::min) / sigma.dim() as f64)
}
