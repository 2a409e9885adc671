use rayon::prelude::*;

use crate::channels::QuantumChannel;
use crate::divergences::{chi2_g, evaluate, FDivergenceSpec, StandardMonotoneFn};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, DensityMatrix};
use crate::random::{ginibre, substream};

use super::sdpi::{SdpiEstimate, SdpiMethod};

pub const DEFAULT_SEED: u64 = 20_240_611;
const FD_STEP: f64 = 1e-6;
const INITIAL_STEP: f64 = 0.1;
const MAX_STEP: f64 = 1.0;

/// The divergence whose contraction ratio is maximized.
#[derive(Debug, Clone)]
pub enum Objective {
    Family(FDivergenceSpec),
    Chi2(StandardMonotoneFn),
}

impl Objective {
    pub fn divergence(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
        match self {
            Objective::Family(spec) => Ok(evaluate(spec, rho, sigma)?.value),
            Objective::Chi2(g) => Ok(chi2_g(rho, sigma, g)?.value),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Objective::Family(spec) => format!("{}:{}", spec.family, spec.name),
            Objective::Chi2(g) => format!("chi2:{}", g.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// The line search stops once the step length in parameter space drops below this.
    pub step_tol: f64,
    pub seed: u64,
    /// States closer than this in trace distance to σ are excluded.
    pub exclusion_radius: f64,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 150, step_tol: 1e-7, seed: DEFAULT_SEED, exclusion_radius: 1e-6 }
    }
}

struct Problem<'a> {
    objective: &'a Objective,
    channel: &'a QuantumChannel,
    sigma: &'a DensityMatrix,
    image_sigma: DensityMatrix,
    exclusion_radius: f64,
}

fn state_from_params(x: &[f64], d: usize) -> Result<DensityMatrix> {
    let a = CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i + j * d);
        c(x[k], x[k + 1])
    });
    DensityMatrix::new(&a * a.adjoint())
}

impl Problem<'_> {
    fn ratio_of_state(&self, rho: &DensityMatrix) -> Option<f64> {
        if rho.trace_distance(self.sigma).ok()? < self.exclusion_radius {
            return None;
        }
        let before = self.objective.divergence(rho, self.sigma).ok()?;
        if !(before > 0.0) {
            return None;
        }
        let after = self.objective.divergence(&self.channel.apply(rho).ok()?, &self.image_sigma).ok()?;
        let r = after / before;
        r.is_finite().then_some(r)
    }

    fn ratio(&self, x: &[f64]) -> Option<f64> {
        let rho = state_from_params(x, self.sigma.dim()).ok()?;
        self.ratio_of_state(&rho)
    }

    fn gradient(&self, x: &[f64], fx: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        let mut grad = vec![0.0; x.len()];
        for k in 0..x.len() {
            let orig = probe[k];
            probe[k] = orig + FD_STEP;
            let up = self.ratio(&probe);
            probe[k] = orig - FD_STEP;
            let down = self.ratio(&probe);
            probe[k] = orig;
            grad[k] = match (up, down) {
                (Some(u), Some(l)) => (u - l) / (2.0 * FD_STEP),
                (Some(u), None) => (u - fx) / FD_STEP,
                (None, Some(l)) => (fx - l) / FD_STEP,
                (None, None) => 0.0,
            };
        }
        grad
    }

    /// Gradient ascent with an adaptive step and backtracking; returns the final point.
    fn ascend(&self, mut x: Vec<f64>, opts: &VariationalOptions) -> Option<(f64, Vec<f64>)> {
        normalize(&mut x);
        let mut fx = self.ratio(&x)?;
        let mut step = INITIAL_STEP;
        for _ in 0..opts.max_iters {
            let grad = self.gradient(&x, fx);
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !(gnorm > 0.0) {
                break;
            }
            let mut accepted = false;
            while step >= opts.step_tol {
                let mut cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + step * gi / gnorm).collect();
                normalize(&mut cand);
                match self.ratio(&cand) {
                    Some(fc) if fc > fx => {
                        x = cand;
                        fx = fc;
                        accepted = true;
                        step = (2.0 * step).min(MAX_STEP);
                        break;
                    }
                    _ => step *= 0.5,
                }
            }
            if !accepted {
                break;
            }
        }
        Some((fx, x))
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Multi-start lower-bound estimate of `sup_ρ D(E(ρ)‖E(σ)) / D(ρ‖σ)` over `ρ = AA†/Tr[AA†]`.
///
/// Restarts run in parallel, each from its own RNG substream of `opts.seed`; results are
/// reduced in restart order, so the estimate is bit-identical for a given seed.
pub fn sdpi_variational(
    objective: &Objective,
    channel: &QuantumChannel,
    sigma: &DensityMatrix,
    opts: &VariationalOptions,
) -> Result<SdpiEstimate> {
    if channel.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: channel.dim(), got: sigma.dim() });
    }
    if opts.restarts == 0 {
        return Err(Error::ParameterOutOfRange("at least one restart is required".into()));
    }
    sigma.require_full_rank()?;
    let image_sigma = channel.apply(sigma)?;
    image_sigma.require_full_rank()?;
    let problem = Problem { objective, channel, sigma, image_sigma, exclusion_radius: opts.exclusion_radius };
    let d = sigma.dim();
    let outcomes: Vec<Option<(f64, Vec<f64>)>> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(opts.seed, i as u64);
            let a = ginibre(d, d, &mut rng);
            let x: Vec<f64> = a.iter().flat_map(|z| [z.re, z.im]).collect();
            problem.ascend(x, opts)
        })
        .collect();
    let valid_restarts = outcomes.iter().filter(|o| o.is_some()).count();
    let best = outcomes
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<f64>)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
        .ok_or(Error::AllRestartsDegenerate)?;
    let state = state_from_params(&best.1, d)?;
    Ok(SdpiEstimate {
        value: best.0.clamp(0.0, 1.0),
        method: SdpiMethod::Variational,
        argmax_state: Some(state),
        top_eigenvalue_check: best.0,
        restarts_used: opts.restarts,
        valid_restarts,
        sigma_is_fixed: super::sdpi::fixed_point_deviation(channel, sigma)? <= super::sdpi::FIXED_POINT_TOL,
        fixed_point_overlap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::sdpi_chi2;
    use approx::assert_abs_diff_eq;

    fn quick() -> VariationalOptions {
        VariationalOptions { restarts: 4, max_iters: 60, ..Default::default() }
    }

    #[test]
    fn identity_channel_ratio_is_one() {
        let sigma = DensityMatrix::from_real_diagonal(&[0.4, 0.6]).unwrap();
        let obj = Objective::Family(FDivergenceSpec::kl());
        let est = sdpi_variational(&obj, &QuantumChannel::identity(2), &sigma, &quick()).unwrap();
        assert!(est.value >= 1.0 - 1e-6);
    }

    #[test]
    fn replacement_channel_ratio_is_zero() {
        let sigma = DensityMatrix::from_real_diagonal(&[0.4, 0.6]).unwrap();
        let obj = Objective::Family(FDivergenceSpec::kl());
        let est = sdpi_variational(&obj, &QuantumChannel::replacement(&sigma), &sigma, &quick()).unwrap();
        assert!(est.value <= 1e-8);
    }

    #[test]
    fn chi2_objective_matches_exact_depolarizing() {
        let ch = QuantumChannel::depolarizing(2, 0.5).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let g = StandardMonotoneFn::g_kmb();
        let est = sdpi_variational(&Objective::Chi2(g.clone()), &ch, &sigma, &quick()).unwrap();
        let exact = sdpi_chi2(&ch, &sigma, &g).unwrap().value;
        assert!(est.value <= exact + 1e-6 && est.value >= exact - 1e-3, "{} vs {exact}", est.value);
        assert_abs_diff_eq!(exact, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let ch = QuantumChannel::random(2, 2, 3).unwrap();
        let pi = ch.fixed_point().unwrap();
        let obj = Objective::Family(FDivergenceSpec::hellinger());
        let a = sdpi_variational(&obj, &ch, &pi, &quick()).unwrap();
        let b = sdpi_variational(&obj, &ch, &pi, &quick()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.argmax_state, b.argmax_state);
    }
}
