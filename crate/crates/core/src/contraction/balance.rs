use std::collections::BTreeMap;

use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::divergences::{g_catalog, StandardMonotoneFn};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;

use super::omega::omega;

/// A residual at or below this certifies detailed balance.
pub const BALANCED_TOL: f64 = 1e-9;
/// Residual allowed for catalog g once GNS balance holds.
pub const IMPLIED_TOL: f64 = 1e-7;

/// `‖Ω⁻¹E* − EΩ⁻¹‖_F / ‖Ω⁻¹‖_F`, zero exactly when E satisfies g-detailed balance
/// with respect to σ.
pub fn detailed_balance_residual(channel: &QuantumChannel, sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<f64> {
    if channel.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: channel.dim(), got: sigma.dim() });
    }
    let om = omega(sigma, g)?;
    let inv = om.inverse().matrix();
    let s = channel.superop().matrix();
    let lhs = inv * s.adjoint();
    let rhs = s * inv;
    Ok((lhs - rhs).norm() / inv.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlenMaasReport {
    pub gns_residual: f64,
    pub residuals: BTreeMap<String, f64>,
    pub gns_balanced: bool,
    /// GNS balance implies balance for every catalog g.
    pub implication_holds: bool,
}

pub fn carlen_maas_check(channel: &QuantumChannel, sigma: &DensityMatrix) -> Result<CarlenMaasReport> {
    let gns_residual = detailed_balance_residual(channel, sigma, &StandardMonotoneFn::gns())?;
    let mut residuals = BTreeMap::new();
    for g in g_catalog() {
        residuals.insert(g.name.clone(), detailed_balance_residual(channel, sigma, &g)?);
    }
    let gns_balanced = gns_residual <= BALANCED_TOL;
    let implication_holds = !gns_balanced || residuals.values().all(|&r| r <= IMPLIED_TOL);
    Ok(CarlenMaasReport { gns_residual, residuals, gns_balanced, implication_holds })
}
