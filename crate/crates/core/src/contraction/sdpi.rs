use serde::{Serialize, Serializer};

use crate::channels::QuantumChannel;
use crate::divergences::StandardMonotoneFn;
use crate::error::{Error, Result};
use crate::json::matrix_to_rows;
use crate::linalg::{vectorize, DensityMatrix};
#[cfg(test)]
use crate::linalg::CMatrix;

use super::omega::omega;

/// `E(σ) = σ` is assumed below this max-entry deviation.
pub const FIXED_POINT_TOL: f64 = 1e-7;
/// Minimum overlap between `Ω^{1/2}(σ)` and the top right singular space.
pub const TOP_OVERLAP_MIN: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpiMethod {
    ExactLambda2,
    Variational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpiEstimate {
    pub value: f64,
    pub method: SdpiMethod,
    #[serde(serialize_with = "serialize_state")]
    pub argmax_state: Option<DensityMatrix>,
    /// Largest singular value of `Ω^{1/2} E Ω^{-1/2}` (exact method) or best ratio before
    /// clamping (variational method).
    pub top_eigenvalue_check: f64,
    pub restarts_used: usize,
    /// Restarts that ended on an admissible state.
    pub valid_restarts: usize,
    /// Whether `E(σ) = σ`, in which case the top singular pair is verified.
    pub sigma_is_fixed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_overlap: Option<f64>,
}

fn serialize_state<S: Serializer>(state: &Option<DensityMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
    state.as_ref().map(|r| matrix_to_rows(r.matrix())).serialize(s)
}

pub(crate) fn fixed_point_deviation(channel: &QuantumChannel, sigma: &DensityMatrix) -> Result<f64> {
    let out = channel.apply_operator(sigma.matrix())?;
    Ok((out - sigma.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm())))
}

/// Exact `η_{χ²_g}(E, σ)` as the second largest eigenvalue of `Ω^{-1} E* Ω E`.
///
/// The operator is self-adjoint only in the Ω-weighted inner product, so it is handled
/// through the singular values of the similar matrix `Ω^{1/2} E Ω^{-1/2}`.
pub fn sdpi_chi2(channel: &QuantumChannel, sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<SdpiEstimate> {
    if channel.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: channel.dim(), got: sigma.dim() });
    }
    let om = omega(sigma, g)?;
    let n = om.sqrt().matrix() * channel.superop().matrix() * om.inv_sqrt().matrix();
    let svd = n.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let top = s[0];
    let second = s.get(1).copied().unwrap_or(0.0);

    let sigma_is_fixed = fixed_point_deviation(channel, sigma)? <= FIXED_POINT_TOL;
    let fixed_point_overlap = if sigma_is_fixed {
        let u = vectorize(&om.sqrt().apply(sigma.matrix())?);
        let u = u.unscale(u.norm());
        let overlap: f64 = order
            .iter()
            .zip(&s)
            .filter(|(_, &sv)| sv >= top - FIXED_POINT_TOL)
            .map(|(&k, _)| (v_t.row(k).transpose().dot(&u)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if overlap < TOP_OVERLAP_MIN {
            return Err(Error::ConvergenceFailure);
        }
        Some(overlap)
    } else {
        None
    };
    Ok(SdpiEstimate {
        value: (second * second).clamp(0.0, 1.0),
        method: SdpiMethod::ExactLambda2,
        argmax_state: None,
        top_eigenvalue_check: top,
        restarts_used: 0,
        valid_restarts: 0,
        sigma_is_fixed,
        fixed_point_overlap,
    })
}

/// Records whether `η_{χ²_g}(E^n, σ) ≤ η_{χ²_g}(E, σ)^n + 1e-8`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Submultiplicativity {
    pub n: u32,
    pub eta_power_channel: f64,
    pub eta_single_pow_n: f64,
    pub holds: bool,
    /// Inequality holds with a margin above 1e-8.
    pub strict: bool,
}

pub fn sdpi_submultiplicativity_check(
    channel: &QuantumChannel,
    sigma: &DensityMatrix,
    g: &StandardMonotoneFn,
    n: u32,
) -> Result<Submultiplicativity> {
    let dev = fixed_point_deviation(channel, sigma)?;
    if dev > FIXED_POINT_TOL {
        return Err(Error::InvalidInput(format!("reference state is not fixed by the channel (deviation {dev:.3e})")));
    }
    let single = sdpi_chi2(channel, sigma, g)?.value;
    let power = sdpi_chi2(&channel.power(n)?, sigma, g)?.value;
    let bound = single.powi(n as i32);
    Ok(Submultiplicativity {
        n,
        eta_power_channel: power,
        eta_single_pow_n: bound,
        holds: power <= bound + 1e-8,
        strict: power < bound - 1e-8,
    })
}

/// Matrix of `Ω^{-1} E* Ω E`.
#[cfg(test)]
fn hermitized(channel: &QuantumChannel, sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<CMatrix> {
    let om = omega(sigma, g)?;
    Ok(om.inverse().matrix() * channel.adjoint().matrix() * om.forward().matrix() * channel.superop().matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::g_catalog;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn gs() -> Vec<StandardMonotoneFn> {
        let mut v = g_catalog();
        v.push(StandardMonotoneFn::gns());
        v
    }

    #[test]
    fn identity_and_replacement() {
        let sigma = DensityMatrix::from_real_diagonal(&[0.3, 0.7]).unwrap();
        for g in gs() {
            let id = sdpi_chi2(&QuantumChannel::identity(2), &sigma, &g).unwrap();
            assert_abs_diff_eq!(id.value, 1.0, epsilon = 1e-12);
            let rep = sdpi_chi2(&QuantumChannel::replacement(&sigma), &sigma, &g).unwrap();
            assert_abs_diff_eq!(rep.value, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rep.top_eigenvalue_check, 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn depolarizing_is_one_minus_p_squared() {
        let sigma = DensityMatrix::maximally_mixed(2);
        for p in [0.25, 0.5, 0.75] {
            let ch = QuantumChannel::depolarizing(2, p).unwrap();
            for g in gs() {
                let est = sdpi_chi2(&ch, &sigma, &g).unwrap();
                assert_abs_diff_eq!(est.value, (1.0 - p) * (1.0 - p), epsilon = 1e-12);
                assert!(est.fixed_point_overlap.unwrap() > 0.99);
            }
        }
    }

    #[test]
    fn classical_chain() {
        let w = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]);
        let ch = QuantumChannel::embedded_classical(&w).unwrap();
        for g in gs() {
            let est = sdpi_chi2(&ch, &DensityMatrix::maximally_mixed(2), &g).unwrap();
            assert_abs_diff_eq!(est.value, 0.16, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_lemma_operator_match_squared_singular_values() {
        let ch = QuantumChannel::random(2, 2, 5).unwrap();
        let pi = ch.fixed_point().unwrap();
        let g = StandardMonotoneFn::g_kmb();
        let op = hermitized(&ch, &pi, &g).unwrap();
        let mut ev: Vec<f64> = op.schur().eigenvalues().unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let est = sdpi_chi2(&ch, &pi, &g).unwrap();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ev[1], est.value, epsilon = 1e-9);
        assert!(ev.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)));
    }

    #[test]
    fn submultiplicative_on_depolarizing() {
        let ch = QuantumChannel::depolarizing(2, 0.5).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let r = sdpi_submultiplicativity_check(&ch, &sigma, &StandardMonotoneFn::g_max(), 3).unwrap();
        assert!(r.holds && !r.strict);
        assert_abs_diff_eq!(r.eta_power_channel, 0.25f64.powi(3), epsilon = 1e-12);
    }
}
