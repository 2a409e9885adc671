//! Quantum inversions `Ω_σ^g`, exact χ² contraction coefficients, variational SDPI
//! estimates, detailed-balance residuals and the contraction-rate experiment.

mod balance;
mod experiment;
mod omega;
mod sdpi;
mod variational;

pub use balance::{carlen_maas_check, detailed_balance_residual, CarlenMaasReport, BALANCED_TOL, IMPLIED_TOL};
pub use experiment::{
    contraction_experiment, estimate_n0, Chi2Eta, ExperimentOptions, ExperimentReport, ExperimentRow, FamilyEta,
    PowerTightness, TightnessVerdict, UpperBoundVerdict, VerdictStatus, CSV_SCHEMA_VERSION,
};
pub use omega::{omega, OmegaOperator};
pub use sdpi::{sdpi_chi2, sdpi_submultiplicativity_check, SdpiEstimate, SdpiMethod, Submultiplicativity, FIXED_POINT_TOL};
pub use variational::{sdpi_variational, Objective, VariationalOptions, DEFAULT_SEED};
