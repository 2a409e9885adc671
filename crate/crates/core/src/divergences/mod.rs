//! Quantum f-divergences (HT, Petz, Matsumoto), χ²_g divergences, the hockey-stick
//! divergence, reverse-Pinsker bounds and the local χ² limit estimator.

mod bounds;
mod chi2;
mod families;
pub mod functions;
mod local;
pub mod quadrature;

use serde::Serialize;

pub use bounds::{chi2_lower_constant, local_reverse_pinsker_constant, reverse_pinsker_bound, LocalPinskerConstant, ReversePinsker};
pub use chi2::{chi2_g, chi2_max, chi2_weights};
pub use families::{
    evaluate, hockey_stick, ht_divergence, matsumoto_divergence, petz_divergence, petz_superoperator_form,
};
pub use functions::{f_catalog, g_catalog, kappa_for_petz, local_weight, FDivergenceSpec, Family, StandardMonotoneFn};
pub use local::{local_chi2_estimate, richardson_to_zero, scaled_lambda_grid, LocalChi2Estimate, DEFAULT_LAMBDA_GRID};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DivergenceDiagnostics {
    /// Absolute error estimate reported by the adaptive quadrature (HT only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand_evaluations: Option<usize>,
    pub rho_full_rank: bool,
    pub sigma_full_rank: bool,
}

/// A divergence value; negative rounding noise is clamped to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub diagnostics: DivergenceDiagnostics,
}

impl DivergenceValue {
    pub(crate) fn new(raw: f64, diagnostics: DivergenceDiagnostics) -> Self {
        Self { value: raw.max(0.0), diagnostics }
    }
}
