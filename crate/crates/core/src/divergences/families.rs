use crate::error::{Error, Result};
use crate::linalg::{
    eig_of_hermitian_matrix, positive_part_trace, sandwiched_ratio, vectorize, CMatrix, DensityMatrix, Superoperator,
};

use super::functions::{FDivergenceSpec, Family};
use super::quadrature::{integrate, QuadratureOptions};
use super::{DivergenceDiagnostics, DivergenceValue};

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    Ok(())
}

fn base_diagnostics(rho: &DensityMatrix, sigma: &DensityMatrix) -> DivergenceDiagnostics {
    DivergenceDiagnostics { rho_full_rank: rho.is_full_rank(), sigma_full_rank: sigma.is_full_rank(), ..Default::default() }
}

/// `E_γ(ρ‖σ) = Tr[(ρ − γσ)_+]` for `γ ≥ 1`.
pub fn hockey_stick(rho: &DensityMatrix, sigma: &DensityMatrix, gamma: f64) -> Result<f64> {
    check_dims(rho, sigma)?;
    if !(gamma >= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("hockey-stick parameter {gamma} < 1")));
    }
    sigma.require_full_rank()?;
    positive_part_trace(&(rho.matrix() - sigma.matrix().scale(gamma)))
}

/// Integrates `weight(γ)·Tr[(a − γb)_+]` over `[1, upper]` with breakpoints at `kinks`.
fn hockey_integral<W: Fn(f64) -> f64>(
    a: &CMatrix,
    b: &CMatrix,
    upper: f64,
    kinks: impl Iterator<Item = f64>,
    weight: W,
) -> Result<(f64, f64, usize)> {
    if !(upper > 1.0) {
        return Ok((0.0, 0.0, 0));
    }
    let mut points = vec![1.0];
    let mut interior: Vec<f64> = kinks.filter(|&t| t > 1.0 && t < upper).collect();
    interior.sort_by(f64::total_cmp);
    points.extend(interior);
    points.push(upper);
    let mut failure = None;
    let integrand = |gamma: f64| {
        let w = weight(gamma);
        match positive_part_trace(&(a - b.scale(gamma))) {
            Ok(e) => w * e,
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        }
    };
    let r = integrate(integrand, &points, QuadratureOptions::default())?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok((r.value, r.error, r.evaluations))
}

/// HT f-divergence `∫₁^∞ f''(γ)E_γ(ρ‖σ) + γ^{-3} f''(1/γ) E_γ(σ‖ρ) dγ`.
///
/// `E_γ(ρ‖σ)` is piecewise smooth in γ with kinks at the generalized eigenvalues `t_k` of
/// the pencil `(ρ, σ)` and vanishes beyond `max t_k`; the second term has kinks at
/// `1/t_k` and vanishes beyond `1/min t_k`. Each smooth piece is integrated adaptively.
pub fn ht_divergence(spec: &FDivergenceSpec, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    sigma.require_full_rank()?;
    rho.require_full_rank()?;
    let t = sandwiched_ratio(rho, sigma)?.eigenvalues()?;
    let (m, big_m) = (t[0], t[t.len() - 1]);
    let (first, err1, n1) =
        hockey_integral(rho.matrix(), sigma.matrix(), big_m, t.iter().copied(), |g| spec.f2(g))?;
    let (second, err2, n2) = hockey_integral(
        sigma.matrix(),
        rho.matrix(),
        1.0 / m,
        t.iter().map(|&x| 1.0 / x),
        |g| spec.f2(1.0 / g) / (g * g * g),
    )?;
    let mut diag = base_diagnostics(rho, sigma);
    diag.quadrature_error = Some(err1 + err2);
    diag.integrand_evaluations = Some(n1 + n2);
    Ok(DivergenceValue::new(first + second, diag))
}

/// Matsumoto (maximal) f-divergence `Tr[σ f(σ^{-1/2} ρ σ^{-1/2})]`.
pub fn matsumoto_divergence(
    spec: &FDivergenceSpec,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    sigma.require_full_rank()?;
    let eig = sandwiched_ratio(rho, sigma)?.eig()?;
    let mut value = 0.0;
    for (k, &t) in eig.values.iter().enumerate() {
        let t = t.max(0.0);
        let ft = spec.f(t);
        if !ft.is_finite() {
            return Err(Error::DomainError(t));
        }
        let v = eig.vectors.column(k);
        let weight = (v.adjoint() * sigma.matrix() * v)[(0, 0)].re;
        value += ft * weight;
    }
    Ok(DivergenceValue::new(value, base_diagnostics(rho, sigma)))
}

fn require_operator_convex(spec: &FDivergenceSpec) -> Result<()> {
    if spec.operator_convex {
        Ok(())
    } else {
        Err(Error::NotOperatorConvex(spec.name.clone()))
    }
}

/// Petz f-divergence `Tr[σ^{1/2} f(Δ_{ρ,σ}) σ^{1/2}]` via the double sum
/// `Σ_ij f(λ_i/μ_j) |⟨φ_i|ψ_j⟩|² μ_j` over the eigensystems of ρ and σ.
pub fn petz_divergence(spec: &FDivergenceSpec, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    require_operator_convex(spec)?;
    check_dims(rho, sigma)?;
    sigma.require_full_rank()?;
    let (lam, phi) = (&rho.spectrum().values, &rho.spectrum().vectors);
    let (mu, psi) = (&sigma.spectrum().values, &sigma.spectrum().vectors);
    let overlap = phi.adjoint() * psi;
    let mut value = 0.0;
    for (i, &l) in lam.iter().enumerate() {
        for (j, &m) in mu.iter().enumerate() {
            let r = l.max(0.0) / m;
            let fr = spec.f(r);
            if !fr.is_finite() {
                return Err(Error::DomainError(r));
            }
            value += fr * overlap[(i, j)].norm_sqr() * m;
        }
    }
    Ok(DivergenceValue::new(value, base_diagnostics(rho, sigma)))
}

/// Petz divergence as `⟨σ^{1/2}, f(Δ_{ρ,σ}) σ^{1/2}⟩` on the `d² × d²` relative modular
/// operator. Independent of [`petz_divergence`]; used as a cross-check.
pub fn petz_superoperator_form(
    spec: &FDivergenceSpec,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<DivergenceValue> {
    require_operator_convex(spec)?;
    check_dims(rho, sigma)?;
    sigma.require_full_rank()?;
    let delta = crate::linalg::relative_modular(rho, sigma)?;
    let m = delta.matrix();
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = eig_of_hermitian_matrix(&herm)?;
    let f_delta = Superoperator::from_matrix(sigma.dim(), eig.map(|x| spec.f(x.max(0.0)))?)?;
    let root = sigma.power(0.5)?;
    let v = vectorize(&root);
    let value = (v.adjoint() * f_delta.matrix() * &v)[(0, 0)].re;
    Ok(DivergenceValue::new(value, base_diagnostics(rho, sigma)))
}

/// Evaluates `spec` with the family it carries.
pub fn evaluate(spec: &FDivergenceSpec, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    match spec.family {
        Family::Ht => ht_divergence(spec, rho, sigma),
        Family::Petz => petz_divergence(spec, rho, sigma),
        Family::Matsumoto => matsumoto_divergence(spec, rho, sigma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermitian_schatten, SchattenOrder};
    use crate::random::{random_density, rng_from_seed};
    use approx::assert_abs_diff_eq;

    fn diag_pair() -> (DensityMatrix, DensityMatrix) {
        (DensityMatrix::from_real_diagonal(&[0.6, 0.4]).unwrap(), DensityMatrix::maximally_mixed(2))
    }

    fn kl_value() -> f64 {
        0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln()
    }

    fn noncommuting_pair() -> (DensityMatrix, DensityMatrix) {
        let rho = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.3, 0.0)],
        ))
        .unwrap();
        let sigma = DensityMatrix::from_real_diagonal(&[0.45, 0.55]).unwrap();
        (rho, sigma)
    }

    #[test]
    fn hockey_stick_examples() {
        let (rho, sigma) = diag_pair();
        assert_abs_diff_eq!(hockey_stick(&rho, &sigma, 1.0).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(hockey_stick(&rho, &sigma, 1.2).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hockey_stick(&rho, &sigma, 3.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hockey_stick(&sigma, &sigma, 1.5).unwrap(), 0.0, epsilon = 1e-15);
        assert!(hockey_stick(&rho, &sigma, 0.5).is_err());
        let pure = DensityMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(hockey_stick(&rho, &pure, 1.0), Err(Error::SingularReference(_))));
    }

    #[test]
    fn hockey_stick_at_one_is_half_trace_distance() {
        let mut rng = rng_from_seed(4);
        for _ in 0..5 {
            let rho = random_density(3, &mut rng);
            let sigma = random_density(3, &mut rng);
            let tn = hermitian_schatten(&(rho.matrix() - sigma.matrix()), SchattenOrder::One).unwrap();
            assert_abs_diff_eq!(hockey_stick(&rho, &sigma, 1.0).unwrap(), tn / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_families_vanish_on_equal_states() {
        let s = random_density(2, &mut rng_from_seed(8));
        for fam in Family::ALL {
            let spec = FDivergenceSpec::kl().with_family(fam);
            assert_abs_diff_eq!(evaluate(&spec, &s, &s).unwrap().value, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn commuting_pair_is_classical_kl() {
        let (rho, sigma) = diag_pair();
        for fam in Family::ALL {
            let spec = FDivergenceSpec::kl().with_family(fam);
            assert_abs_diff_eq!(evaluate(&spec, &rho, &sigma).unwrap().value, kl_value(), epsilon = 1e-12);
        }
    }

    #[test]
    fn petz_kl_is_umegaki() {
        let (rho, sigma) = noncommuting_pair();
        let ln_rho = rho.spectrum().map(f64::ln).unwrap();
        let ln_sigma = sigma.spectrum().map(f64::ln).unwrap();
        let umegaki = (rho.matrix() * (ln_rho - ln_sigma)).trace().re;
        let petz = petz_divergence(&FDivergenceSpec::kl(), &rho, &sigma).unwrap().value;
        assert_abs_diff_eq!(petz, umegaki, epsilon = 1e-12);
        let superop = petz_superoperator_form(&FDivergenceSpec::kl(), &rho, &sigma).unwrap().value;
        assert_abs_diff_eq!(petz, superop, epsilon = 1e-12);
    }

    #[test]
    fn ht_between_measured_and_matsumoto() {
        let (rho, sigma) = noncommuting_pair();
        let kl = FDivergenceSpec::kl();
        let ht = ht_divergence(&kl, &rho, &sigma).unwrap();
        let mats = matsumoto_divergence(&kl, &rho, &sigma).unwrap().value;
        // measuring in the eigenbasis of σ gives a lower bound for every quantum extension
        let p = [rho.matrix()[(0, 0)].re, rho.matrix()[(1, 1)].re];
        let measured = kl.classical(&p, &[0.45, 0.55]);
        assert!(measured <= ht.value + 1e-12 && ht.value <= mats + 1e-12);
        assert!(ht.diagnostics.quadrature_error.unwrap() <= 1e-8 * ht.value);
    }

    #[test]
    fn matsumoto_chi2_matches_spectral_oracle() {
        let (rho, sigma) = noncommuting_pair();
        let s = sigma.power(-0.5).unwrap();
        let t = &s * rho.matrix() * &s;
        let ident = CMatrix::identity(2, 2);
        let oracle = (sigma.matrix() * (&t - &ident) * (&t - &ident)).trace().re;
        let v = matsumoto_divergence(&FDivergenceSpec::chi_square(), &rho, &sigma).unwrap().value;
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-12);
    }

    #[test]
    fn petz_requires_operator_convexity() {
        let mut spec = FDivergenceSpec::kl();
        spec.operator_convex = false;
        let (rho, sigma) = diag_pair();
        assert!(matches!(petz_divergence(&spec, &rho, &sigma), Err(Error::NotOperatorConvex(_))));
    }

    #[test]
    fn ht_rejects_rank_deficient_inputs() {
        let (_, sigma) = diag_pair();
        let pure = DensityMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(ht_divergence(&FDivergenceSpec::kl(), &pure, &sigma), Err(Error::SingularReference(_))));
        assert!(matches!(ht_divergence(&FDivergenceSpec::kl(), &sigma, &pure), Err(Error::SingularReference(_))));
        // an explicit regularization makes the pair admissible
        let reg = pure.regularized(1e-3).unwrap();
        assert!(ht_divergence(&FDivergenceSpec::kl(), &reg, &sigma).is_ok());
    }
}
