use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::channels::QuantumChannel;
use crate::divergences::{local_weight, FDivergenceSpec, Family, StandardMonotoneFn};
use crate::error::{Error, Result};
use crate::json::matrix_to_rows;
use crate::linalg::{hermitian_schatten, CVector, DensityMatrix, SchattenOrder};
use crate::random::{ginibre, random_density, substream};

use super::balance::{detailed_balance_residual, BALANCED_TOL};
use super::sdpi::sdpi_chi2;
use super::variational::{sdpi_variational, Objective, VariationalOptions};

/// Bumped whenever the CSV column layout changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;
const POWER_REL_TOL: f64 = 1e-7;
const POWER_ABS_FLOOR: f64 = 1e-14;
const PRIMITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub n_max: u32,
    pub variational: VariationalOptions,
    /// Absolute slack on the asymptotic verdicts.
    pub slack: f64,
    /// Number of sampled inputs used to locate n₀.
    pub n0_samples: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { n_max: 6, variational: VariationalOptions::default(), slack: 0.02, n0_samples: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEta {
    pub family: Family,
    pub f_name: String,
    pub eta: f64,
    /// `η^{1/n}`.
    pub eta_root: f64,
    pub valid_restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Eta {
    pub g_name: String,
    /// `η_{χ²_g}(E^n, π)`.
    pub eta_power: f64,
    /// `η_{χ²_g}(E, π)`, the asymptotic rate bound.
    pub eta_single: f64,
    pub eta_single_pow_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: u32,
    pub eta_f: Vec<FamilyEta>,
    pub chi2: Vec<Chi2Eta>,
    /// Detailed-balance residual of `E^n` per g.
    pub db_residuals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Skipped,
}

impl VerdictStatus {
    fn from_bool(ok: bool) -> Self {
        if ok {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        }
    }
}

/// `η_f(E^n)^{1/n} ≤ η_{χ²_g}(E) + slack` for all n ≥ n₀, every family and every g.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundVerdict {
    pub status: VerdictStatus,
    pub n0: Option<u32>,
    pub checked_cells: usize,
    /// Smallest `bound + slack − η^{1/n}` over checked cells.
    pub worst_margin: Option<f64>,
    pub failures: Vec<String>,
}

/// `η_{χ²_g}(E^n) = η_{χ²_g}(E)^n` for a g under which E is detailed balanced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTightness {
    pub g_name: String,
    pub db_residual: f64,
    pub status: VerdictStatus,
    pub max_rel_error: Option<f64>,
}

/// Tightness for one family, using its local weight κ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessVerdict {
    pub family: Family,
    pub f_name: String,
    pub kappa: String,
    pub db_residual: f64,
    pub eta_kappa_single: f64,
    pub status: VerdictStatus,
    pub max_power_rel_error: Option<f64>,
    /// Smallest `η_f(E^n) − (η_κ(E)^n − slack)`.
    pub min_lower_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub channel_label: String,
    pub dim: usize,
    #[serde(serialize_with = "serialize_state")]
    pub pi: DensityMatrix,
    pub spectral_gap: f64,
    pub n_max: u32,
    pub slack: f64,
    pub seed: u64,
    pub restarts: usize,
    pub n0: Option<u32>,
    /// Max sampled `‖E^n(ρ) − π‖_∞` per n, compared against `λ_min(π)/2`.
    pub n0_deviations: Vec<f64>,
    pub families: Vec<String>,
    pub gs: Vec<String>,
    pub rows: Vec<ExperimentRow>,
    pub upper_bound: UpperBoundVerdict,
    pub power_tightness: Vec<PowerTightness>,
    pub tightness: Vec<TightnessVerdict>,
    pub csv_schema_version: u32,
}

fn serialize_state<S: Serializer>(state: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    matrix_to_rows(state.matrix()).serialize(s)
}

fn family_key(spec: &FDivergenceSpec) -> String {
    format!("{}_{}", spec.family, spec.name)
}

fn within_power_tol(actual: f64, expected: f64) -> bool {
    (actual - expected).abs() <= POWER_REL_TOL * expected.abs() + POWER_ABS_FLOOR
}

fn rel_error(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(f64::MIN_POSITIVE)
}

/// Smallest n whose iterates of sampled inputs all lie within `λ_min(π)/2` of π in operator
/// norm, together with the sampled maxima.
pub fn estimate_n0(channel: &QuantumChannel, pi: &DensityMatrix, n_max: u32, samples: usize, seed: u64) -> Result<(Option<u32>, Vec<f64>)> {
    let d = channel.dim();
    let mut inputs = Vec::with_capacity(samples);
    for k in 0..samples {
        let mut rng = substream(seed, 1 << 40 | k as u64);
        if k % 2 == 0 {
            inputs.push(random_density(d, &mut rng).matrix().clone());
        } else {
            let g = ginibre(d, 1, &mut rng);
            let psi = CVector::from_iterator(d, g.iter().copied());
            inputs.push(DensityMatrix::pure(&psi)?.matrix().clone());
        }
    }
    let radius = pi.min_eigenvalue() / 2.0;
    let mut deviations = Vec::with_capacity(n_max as usize);
    let mut n0 = None;
    for n in 1..=n_max {
        let mut worst = 0.0f64;
        for x in inputs.iter_mut() {
            *x = channel.apply_operator(x)?;
            worst = worst.max(hermitian_schatten(&(&*x - pi.matrix()), SchattenOrder::Infinity)?);
        }
        if n0.is_none() && worst < radius {
            n0 = Some(n);
        }
        deviations.push(worst);
    }
    Ok((n0, deviations))
}

/// Contraction-rate experiment for a primitive channel: variational `η_f(E^n, π)` per
/// family, exact `η_{χ²_g}` for E and `E^n`, detailed-balance residuals and the verdicts.
pub fn contraction_experiment(
    channel: &QuantumChannel,
    families: &[FDivergenceSpec],
    gs: &[StandardMonotoneFn],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    if !(1..=32).contains(&opts.n_max) {
        return Err(Error::ParameterOutOfRange(format!("n_max {} outside [1, 32]", opts.n_max)));
    }
    let prim = channel.is_primitive(PRIMITIVITY_TOL)?;
    if !prim.is_primitive {
        return Err(Error::NotPrimitive(format!(
            "{}: unit multiplicity {}, peripheral eigenvalues {}, min eigenvalue of fixed point {:.3e}",
            channel.label(),
            prim.unit_multiplicity,
            prim.peripheral_count,
            prim.fixed_point_min_eigenvalue
        )));
    }
    let pi = channel.fixed_point()?;
    let seed = opts.variational.seed;
    let (n0, n0_deviations) = estimate_n0(channel, &pi, opts.n_max, opts.n0_samples, seed)?;

    let single: Vec<f64> = gs.iter().map(|g| sdpi_chi2(channel, &pi, g).map(|e| e.value)).collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(opts.n_max as usize);
    for n in 1..=opts.n_max {
        let power = channel.power(n)?;
        let mut eta_f = Vec::with_capacity(families.len());
        for (idx, spec) in families.iter().enumerate() {
            let mut vopts = opts.variational;
            vopts.seed = seed.wrapping_add(1_000 * n as u64 + idx as u64);
            let est = sdpi_variational(&Objective::Family(spec.clone()), &power, &pi, &vopts)?;
            eta_f.push(FamilyEta {
                family: spec.family,
                f_name: spec.name.clone(),
                eta: est.value,
                eta_root: est.value.powf(1.0 / n as f64),
                valid_restarts: est.valid_restarts,
            });
        }
        let mut chi2 = Vec::with_capacity(gs.len());
        let mut db_residuals = BTreeMap::new();
        for (g, &eta_single) in gs.iter().zip(&single) {
            chi2.push(Chi2Eta {
                g_name: g.name.clone(),
                eta_power: sdpi_chi2(&power, &pi, g)?.value,
                eta_single,
                eta_single_pow_n: eta_single.powi(n as i32),
            });
            db_residuals.insert(g.name.clone(), detailed_balance_residual(&power, &pi, g)?);
        }
        rows.push(ExperimentRow { n, eta_f, chi2, db_residuals });
    }

    let upper_bound = upper_bound_verdict(&rows, n0, opts.slack);

    let mut power_tightness = Vec::with_capacity(gs.len());
    for (k, g) in gs.iter().enumerate() {
        let db_residual = detailed_balance_residual(channel, &pi, g)?;
        if db_residual > BALANCED_TOL {
            power_tightness.push(PowerTightness { g_name: g.name.clone(), db_residual, status: VerdictStatus::Skipped, max_rel_error: None });
            continue;
        }
        let mut ok = true;
        let mut worst = 0.0f64;
        for row in &rows {
            let cell = &row.chi2[k];
            ok &= within_power_tol(cell.eta_power, cell.eta_single_pow_n);
            worst = worst.max(rel_error(cell.eta_power, cell.eta_single_pow_n));
        }
        power_tightness.push(PowerTightness {
            g_name: g.name.clone(),
            db_residual,
            status: VerdictStatus::from_bool(ok),
            max_rel_error: Some(worst),
        });
    }

    let mut tightness = Vec::with_capacity(families.len());
    for (idx, spec) in families.iter().enumerate() {
        let kappa = local_weight(spec)?;
        let db_residual = detailed_balance_residual(channel, &pi, &kappa)?;
        let eta_kappa_single = sdpi_chi2(channel, &pi, &kappa)?.value;
        let mut verdict = TightnessVerdict {
            family: spec.family,
            f_name: spec.name.clone(),
            kappa: kappa.name.clone(),
            db_residual,
            eta_kappa_single,
            status: VerdictStatus::Skipped,
            max_power_rel_error: None,
            min_lower_margin: None,
        };
        if db_residual <= BALANCED_TOL {
            let mut ok = true;
            let mut worst = 0.0f64;
            let mut margin = f64::INFINITY;
            for (row, n) in rows.iter().zip(1..) {
                let power_eta = sdpi_chi2(&channel.power(n)?, &pi, &kappa)?.value;
                let expected = eta_kappa_single.powi(n as i32);
                ok &= within_power_tol(power_eta, expected);
                worst = worst.max(rel_error(power_eta, expected));
                let m = row.eta_f[idx].eta - (expected - opts.slack);
                ok &= m >= 0.0;
                margin = margin.min(m);
            }
            verdict.status = VerdictStatus::from_bool(ok);
            verdict.max_power_rel_error = Some(worst);
            verdict.min_lower_margin = Some(margin);
        }
        tightness.push(verdict);
    }

    Ok(ExperimentReport {
        channel_label: channel.label().to_string(),
        dim: channel.dim(),
        pi,
        spectral_gap: prim.spectral_gap,
        n_max: opts.n_max,
        slack: opts.slack,
        seed,
        restarts: opts.variational.restarts,
        n0,
        n0_deviations,
        families: families.iter().map(family_key).collect(),
        gs: gs.iter().map(|g| g.name.clone()).collect(),
        rows,
        upper_bound,
        power_tightness,
        tightness,
        csv_schema_version: CSV_SCHEMA_VERSION,
    })
}

fn upper_bound_verdict(rows: &[ExperimentRow], n0: Option<u32>, slack: f64) -> UpperBoundVerdict {
    let mut failures = Vec::new();
    let mut worst: Option<f64> = None;
    let mut checked_cells = 0;
    if let Some(n0) = n0 {
        for row in rows.iter().filter(|r| r.n >= n0) {
            for fam in &row.eta_f {
                for g in &row.chi2 {
                    checked_cells += 1;
                    let margin = g.eta_single + slack - fam.eta_root;
                    worst = Some(worst.map_or(margin, |w: f64| w.min(margin)));
                    if margin < 0.0 {
                        failures.push(format!(
                            "n={} {}:{} eta^(1/n)={:.6} > {}={:.6} + {slack}",
                            row.n, fam.family, fam.f_name, fam.eta_root, g.g_name, g.eta_single
                        ));
                    }
                }
            }
        }
    }
    UpperBoundVerdict {
        status: if n0.is_none() { VerdictStatus::Skipped } else { VerdictStatus::from_bool(failures.is_empty()) },
        n0,
        checked_cells,
        worst_margin: worst,
        failures,
    }
}

impl ExperimentReport {
    pub fn csv_header(&self) -> Vec<String> {
        let mut cols = vec!["n".to_string()];
        cols.extend(self.families.iter().map(|f| format!("eta_{f}")));
        cols.extend(self.families.iter().map(|f| format!("eta_root_{f}")));
        cols.extend(self.gs.iter().map(|g| format!("chi2_{g}_power")));
        cols.extend(self.gs.iter().map(|g| format!("chi2_{g}_bound")));
        cols.extend(self.gs.iter().map(|g| format!("db_{g}")));
        cols
    }

    /// Per-n table with a frozen column order; see [`CSV_SCHEMA_VERSION`].
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![row.n.to_string()];
            cells.extend(row.eta_f.iter().map(|e| format!("{:.12e}", e.eta)));
            cells.extend(row.eta_f.iter().map(|e| format!("{:.12e}", e.eta_root)));
            cells.extend(row.chi2.iter().map(|c| format!("{:.12e}", c.eta_power)));
            cells.extend(row.chi2.iter().map(|c| format!("{:.12e}", c.eta_single)));
            cells.extend(self.gs.iter().map(|g| format!("{:.6e}", row.db_residuals[g])));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
