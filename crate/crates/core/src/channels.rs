//! CPTP maps: representations, constructors for the standard test families, adjoints,
//! powers, fixed points and the spectral primitivity test.

use nalgebra::{DMatrix, Schur, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, real, validate_density, CMatrix, DensityMatrix, Superoperator, C64, DEFAULT_TOL};
use crate::random::{haar_unitary, rng_from_seed};

/// Tolerance on `Σ K†K = I` and on the Choi matrix checks.
pub const CPTP_TOL: f64 = 1e-9;
/// Singular values of `S − I` below this count as fixed directions.
pub const FIXED_SPACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Option<Vec<CMatrix>>,
    superop: Superoperator,
    label: String,
}

/// Deviation from trace preservation and smallest Choi eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpDiagnostics {
    pub trace_deviation: f64,
    pub choi_min_eigenvalue: f64,
}

impl CptpDiagnostics {
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.trace_deviation <= tol && self.choi_min_eigenvalue >= -tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitivityReport {
    pub is_primitive: bool,
    /// `1 −` second-largest eigenvalue modulus of the superoperator.
    pub spectral_gap: f64,
    /// Smallest eigenvalue of the fixed point; zero when no unique fixed point exists.
    pub fixed_point_min_eigenvalue: f64,
    /// Eigenvalues of modulus at least `1 − tol`.
    pub peripheral_count: usize,
    /// Eigenvalues within `tol` of 1.
    pub unit_multiplicity: usize,
}

fn kraus_superop(kraus: &[CMatrix]) -> CMatrix {
    let d = kraus[0].nrows();
    let mut s = CMatrix::zeros(d * d, d * d);
    for k in kraus {
        s += k.map(|z| z.conj()).kronecker(k);
    }
    s
}

fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = real(1.0);
    m
}

fn pauli_matrices() -> [CMatrix; 4] {
    let z = C64::default();
    [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[z, real(1.0), real(1.0), z]),
        CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        CMatrix::from_row_slice(2, 2, &[real(1.0), z, z, real(-1.0)]),
    ]
}

/// Orthonormal Hermitian basis of the `d × d` matrices, as columns of vectorizations.
/// Hermiticity-preserving maps have real matrices in this basis.
fn hermitian_basis(d: usize) -> CMatrix {
    let n = d * d;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..d {
        b[(i + i * d, k)] = real(1.0);
        k += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            b[(i + j * d, k)] = real(s);
            b[(j + i * d, k)] = real(s);
            k += 1;
            b[(i + j * d, k)] = c(0.0, s);
            b[(j + i * d, k)] = c(0.0, -s);
            k += 1;
        }
    }
    b
}

impl QuantumChannel {
    /// Channel from a Kraus list; the superoperator is `Σ conj(K) ⊗ K`.
    pub fn from_kraus(kraus: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let d = first.nrows();
        if d == 0 {
            return Err(Error::DimensionTooSmall { min: 1, got: 0 });
        }
        for k in &kraus {
            if k.nrows() != k.ncols() {
                return Err(Error::NotSquare(k.nrows(), k.ncols()));
            }
            if k.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.nrows() });
            }
        }
        let mut sum = CMatrix::zeros(d, d);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (sum - CMatrix::identity(d, d)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if dev > CPTP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        let superop = Superoperator::from_matrix(d, kraus_superop(&kraus))?;
        Ok(Self { dim: d, kraus: Some(kraus), superop, label: label.into() })
    }

    /// Channel from a superoperator matrix; fails unless the map is CPTP within tolerance.
    pub fn from_superoperator(superop: Superoperator, label: impl Into<String>) -> Result<Self> {
        let diag = cptp_diagnostics(&superop)?;
        if diag.trace_deviation > CPTP_TOL {
            return Err(Error::NotTracePreserving(diag.trace_deviation));
        }
        if diag.choi_min_eigenvalue < -CPTP_TOL {
            return Err(Error::NotCompletelyPositive(diag.choi_min_eigenvalue));
        }
        Ok(Self { dim: superop.dim(), kraus: None, superop, label: label.into() })
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![CMatrix::identity(d, d)], "identity").expect("identity is CPTP")
    }

    /// Unitary conjugation `ρ -> U ρ U†`.
    pub fn unitary(u: CMatrix, label: impl Into<String>) -> Result<Self> {
        Self::from_kraus(vec![u], label)
    }

    /// `ρ -> (1 − p)ρ + p·Tr[ρ]·I/d` for `p ∈ [0, 1]`.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange(format!("depolarizing p = {p} not in [0, 1]")));
        }
        if d < 2 {
            return Err(Error::DimensionTooSmall { min: 2, got: d });
        }
        let mut kraus = Vec::with_capacity(d * d + 1);
        if p < 1.0 {
            kraus.push(CMatrix::identity(d, d).scale((1.0 - p).sqrt()));
        }
        if p > 0.0 {
            let w = (p / d as f64).sqrt();
            for i in 0..d {
                for j in 0..d {
                    kraus.push(matrix_unit(d, i, j).scale(w));
                }
            }
        }
        Self::from_kraus(kraus, format!("depolarizing(d={d},p={p})"))
    }

    /// Pauli channel `ρ -> Σ p_k σ_k ρ σ_k`.
    pub fn pauli(probs: [f64; 4]) -> Result<Self> {
        check_probability(&probs)?;
        let kraus = pauli_matrices()
            .into_iter()
            .zip(probs)
            .filter(|(_, p)| *p > 0.0)
            .map(|(s, p)| s.scale(p.sqrt()))
            .collect();
        Self::from_kraus(kraus, format!("pauli({},{},{},{})", probs[0], probs[1], probs[2], probs[3]))
    }

    /// Embeds a column-stochastic matrix `W[i][j] = W(i|j)` as
    /// `ρ -> Σ_ij W(i|j) ⟨j|ρ|j⟩ |i⟩⟨i|`.
    pub fn embedded_classical(w: &DMatrix<f64>) -> Result<Self> {
        let d = w.nrows();
        if w.ncols() != d {
            return Err(Error::NotSquare(d, w.ncols()));
        }
        if d < 2 {
            return Err(Error::DimensionTooSmall { min: 2, got: d });
        }
        for j in 0..d {
            let col = w.column(j);
            if col.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(Error::NotStochastic(format!("column {j} has a negative entry")));
            }
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > CPTP_TOL {
                return Err(Error::NotStochastic(format!("column {j} sums to {s}")));
            }
        }
        let mut kraus = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if w[(i, j)] > 0.0 {
                    kraus.push(matrix_unit(d, i, j).scale(w[(i, j)].sqrt()));
                }
            }
        }
        Self::from_kraus(kraus, format!("embedded_classical(d={d})"))
    }

    /// Generalized amplitude damping with damping `gamma` and excitation weight `lambda`;
    /// the fixed point is `diag(1 − λ, λ)`.
    pub fn amplitude_damping(gamma: f64, lambda: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("damping {gamma} not in (0, 1)")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("excitation weight {lambda} not in (0, 1)")));
        }
        let z = C64::default();
        let (a, b) = ((1.0 - lambda).sqrt(), lambda.sqrt());
        let (g, h) = (gamma.sqrt(), (1.0 - gamma).sqrt());
        let kraus = vec![
            CMatrix::from_row_slice(2, 2, &[real(a), z, z, real(a * h)]),
            CMatrix::from_row_slice(2, 2, &[z, real(a * g), z, z]),
            CMatrix::from_row_slice(2, 2, &[real(b * h), z, z, real(b)]),
            CMatrix::from_row_slice(2, 2, &[z, z, real(b * g), z]),
        ];
        Self::from_kraus(kraus, format!("amplitude_damping(gamma={gamma},lambda={lambda})"))
    }

    /// Stinespring dilation of a seeded Haar-random isometry `C^d -> C^d ⊗ C^env`.
    pub fn random(d: usize, env: usize, seed: u64) -> Result<Self> {
        if env < 1 {
            return Err(Error::ParameterOutOfRange("environment dimension must be at least 1".into()));
        }
        if d < 2 {
            return Err(Error::DimensionTooSmall { min: 2, got: d });
        }
        let mut rng = rng_from_seed(seed);
        let u = haar_unitary(d * env, &mut rng);
        let kraus = (0..env).map(|k| CMatrix::from_fn(d, d, |i, j| u[(k * d + i, j)])).collect();
        Self::from_kraus(kraus, format!("random(d={d},env={env},seed={seed})"))
    }

    /// Replacement channel `ρ -> Tr[ρ]·σ`.
    pub fn replacement(sigma: &DensityMatrix) -> Self {
        let d = sigma.dim();
        let s = crate::linalg::vectorize(sigma.matrix()) * crate::linalg::vectorize(&CMatrix::identity(d, d)).adjoint();
        Self {
            dim: d,
            kraus: None,
            superop: Superoperator::from_matrix(d, s).expect("d² × d²"),
            label: "replacement".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        self.superop.apply(x)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rho.dim() });
        }
        validate_density(self.superop.apply(rho.matrix())?, rho.validation_tol())
    }

    /// Hilbert–Schmidt adjoint (Heisenberg picture); unital for CPTP maps.
    pub fn adjoint(&self) -> Superoperator {
        self.superop.adjoint()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &QuantumChannel) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            kraus: None,
            superop: self.superop.compose(&other.superop)?,
            label: format!("{}∘{}", self.label, other.label),
        })
    }

    /// n-fold composition via repeated squaring of the superoperator.
    pub fn power(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange("channel power must be at least 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        Ok(Self { dim: self.dim, kraus: None, superop: self.superop.power(n), label: format!("{}^{n}", self.label) })
    }

    pub fn cptp_diagnostics(&self) -> Result<CptpDiagnostics> {
        cptp_diagnostics(&self.superop)
    }

    /// Real matrix of the map in an orthonormal Hermitian operator basis.
    fn real_representation(&self) -> (DMatrix<f64>, CMatrix) {
        let b = hermitian_basis(self.dim);
        let r = b.adjoint() * self.superop.matrix() * &b;
        (r.map(|z| z.re), b)
    }

    /// Eigenvalues of the superoperator, sorted by decreasing modulus.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        let (r, _) = self.real_representation();
        let n = r.nrows();
        let schur = Schur::try_new(r, f64::EPSILON, 10_000 * n).ok_or(Error::ConvergenceFailure)?;
        let mut ev: Vec<C64> = schur.complex_eigenvalues().iter().map(|z| c(z.re, z.im)).collect();
        ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        Ok(ev)
    }

    /// The unique stationary state.
    pub fn fixed_point(&self) -> Result<DensityMatrix> {
        let (r, b) = self.real_representation();
        let n = r.nrows();
        let shifted = r - DMatrix::<f64>::identity(n, n);
        let svd = SVD::new(shifted, false, true);
        let v_t = svd.v_t.ok_or(Error::ConvergenceFailure)?;
        let s = &svd.singular_values;
        let null_count = s.iter().filter(|&&x| x < FIXED_SPACE_TOL).count();
        if null_count > 1 {
            return Err(Error::DegenerateFixedSpace(null_count));
        }
        let k = (0..n).min_by(|&i, &j| s[i].total_cmp(&s[j])).expect("nonempty");
        let coeffs = crate::linalg::CVector::from_iterator(n, v_t.row(k).iter().map(|&x| real(x)));
        let x = crate::linalg::devectorize(&(&b * coeffs), self.dim)?;
        let x = (&x + x.adjoint()).scale(0.5);
        let tr = x.trace().re;
        if tr.abs() < 1e-12 {
            return Err(Error::TraceZeroEigenvector);
        }
        let pi = validate_density(x.unscale(tr), DEFAULT_TOL)?;
        let residual = crate::linalg::hermitian_schatten(
            &(self.superop.apply(pi.matrix())? - pi.matrix()),
            crate::linalg::SchattenOrder::One,
        )?;
        if residual > 1e-8 {
            return Err(Error::ConvergenceFailure);
        }
        Ok(pi)
    }

    /// Spectral primitivity test: eigenvalue 1 simple, nothing else on the circle of radius
    /// `1 − tol`, fixed point full rank.
    pub fn is_primitive(&self, tol: f64) -> Result<PrimitivityReport> {
        let ev = self.spectrum()?;
        let peripheral_count = ev.iter().filter(|z| z.norm() >= 1.0 - tol).count();
        let unit_multiplicity = ev.iter().filter(|z| (*z - real(1.0)).norm() <= tol).count();
        let second = ev.get(1).map_or(0.0, |z| z.norm());
        let fixed_point_min_eigenvalue = match self.fixed_point() {
            Ok(pi) => pi.min_eigenvalue(),
            Err(Error::DegenerateFixedSpace(_)) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(PrimitivityReport {
            is_primitive: unit_multiplicity == 1 && peripheral_count == 1 && fixed_point_min_eigenvalue > tol,
            spectral_gap: 1.0 - second,
            fixed_point_min_eigenvalue,
            peripheral_count,
            unit_multiplicity,
        })
    }
}

fn check_probability(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::NotProbability(format!("{p:?} has a negative entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > CPTP_TOL {
        return Err(Error::NotProbability(format!("{p:?} sums to {s}")));
    }
    Ok(())
}

/// Trace-preservation deviation `‖Tr_out J − I‖_max` and `λ_min(J)` of the Choi matrix J.
pub fn cptp_diagnostics(superop: &Superoperator) -> Result<CptpDiagnostics> {
    let d = superop.dim();
    let j = superop.choi();
    let mut dev = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let t: C64 = (0..d).map(|r| j[(a * d + r, b * d + r)]).sum();
            let target = if a == b { real(1.0) } else { C64::default() };
            dev = dev.max((t - target).norm());
        }
    }
    let herm = (&j + j.adjoint()).scale(0.5);
    let ev = crate::linalg::hermitian_eigenvalues(&herm)?;
    Ok(CptpDiagnostics { trace_deviation: dev, choi_min_eigenvalue: ev[0] })
}

/// JSON channel description consumed by the CLI and by test fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Kraus {
        #[serde(with = "crate::json::matrix_list")]
        kraus: Vec<CMatrix>,
        #[serde(default)]
        label: Option<String>,
    },
    Depolarizing {
        #[serde(default = "default_dim")]
        dim: usize,
        p: f64,
    },
    Pauli {
        probs: [f64; 4],
    },
    EmbeddedClassical {
        /// Column-stochastic, `w[i][j] = W(i|j)`.
        w: Vec<Vec<f64>>,
    },
    AmplitudeDamping {
        gamma: f64,
        lambda: f64,
    },
    Random {
        #[serde(default = "default_dim")]
        dim: usize,
        env: usize,
        seed: u64,
    },
}

fn default_dim() -> usize {
    2
}

impl ChannelSpec {
    pub fn build(&self) -> Result<QuantumChannel> {
        match self {
            ChannelSpec::Kraus { kraus, label } => {
                QuantumChannel::from_kraus(kraus.clone(), label.clone().unwrap_or_else(|| "kraus".into()))
            }
            ChannelSpec::Depolarizing { dim, p } => QuantumChannel::depolarizing(*dim, *p),
            ChannelSpec::Pauli { probs } => QuantumChannel::pauli(*probs),
            ChannelSpec::EmbeddedClassical { w } => {
                let d = w.len();
                if w.iter().any(|row| row.len() != d) {
                    return Err(Error::NotSquare(d, w.first().map_or(0, Vec::len)));
                }
                QuantumChannel::embedded_classical(&DMatrix::from_fn(d, d, |i, j| w[i][j]))
            }
            ChannelSpec::AmplitudeDamping { gamma, lambda } => QuantumChannel::amplitude_damping(*gamma, *lambda),
            ChannelSpec::Random { dim, env, seed } => QuantumChannel::random(*dim, *env, *seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_inner, CVector};
    use crate::random::{ginibre, random_density};
    use approx::assert_abs_diff_eq;

    fn sym_chain(a: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0 - a, a, a, 1.0 - a])
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_kraus() {
        let e = QuantumChannel::identity(2);
        assert!(close(e.superop().matrix(), &CMatrix::identity(4, 4), 1e-15));
    }

    #[test]
    fn pauli_depolarizing_matches_affine_form() {
        let p: f64 = 0.75;
        let w = (p / 4.0).sqrt();
        let [i, x, y, z] = pauli_matrices();
        let e = QuantumChannel::from_kraus(
            vec![i.scale((1.0 - 3.0 * p / 4.0).sqrt()), x.scale(w), y.scale(w), z.scale(w)],
            "twirl",
        )
        .unwrap();
        let dep = QuantumChannel::depolarizing(2, p).unwrap();
        let mut rng = rng_from_seed(1);
        for _ in 0..5 {
            let rho = random_density(2, &mut rng);
            let expected = rho.matrix().scale(1.0 - p) + CMatrix::identity(2, 2).scale(p / 2.0);
            assert!(close(e.apply(&rho).unwrap().matrix(), &expected, 1e-12));
            assert!(close(dep.apply(&rho).unwrap().matrix(), &expected, 1e-12));
        }
    }

    #[test]
    fn kraus_not_trace_preserving() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let k = vec![CMatrix::identity(2, 2).scale(s), CMatrix::identity(2, 2).scale(s * 1.1)];
        assert!(matches!(QuantumChannel::from_kraus(k, "bad"), Err(Error::NotTracePreserving(_))));
        let mixed = vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)];
        assert!(matches!(QuantumChannel::from_kraus(mixed, "bad"), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn apply_examples() {
        let ket0 = DensityMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let out = QuantumChannel::depolarizing(2, 0.5).unwrap().apply(&ket0).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, 0.25, epsilon = 1e-14);
        let pi = DensityMatrix::from_real_diagonal(&[0.3, 0.7]).unwrap();
        let rep = QuantumChannel::replacement(&pi);
        let rho = random_density(2, &mut rng_from_seed(2));
        assert!(close(rep.apply(&rho).unwrap().matrix(), pi.matrix(), 1e-14));
        let three = DensityMatrix::maximally_mixed(3);
        assert!(matches!(rep.apply(&three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn adjoint_of_unitary_and_pauli() {
        let u = haar_unitary(2, &mut rng_from_seed(4));
        let e = QuantumChannel::unitary(u.clone(), "u").unwrap();
        let expected = Superoperator::sandwich(&u.adjoint(), &u).unwrap();
        assert!(close(e.adjoint().matrix(), expected.matrix(), 1e-12));
        let p = QuantumChannel::pauli([0.5, 0.2, 0.2, 0.1]).unwrap();
        assert!(close(p.adjoint().matrix(), p.superop().matrix(), 1e-14));
    }

    #[test]
    fn adjoint_defining_identity() {
        let e = QuantumChannel::random(3, 2, 9).unwrap();
        let mut rng = rng_from_seed(10);
        let a = ginibre(3, 3, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let lhs = hs_inner(&a, &e.apply_operator(&b).unwrap());
        let rhs = hs_inner(&e.adjoint().apply(&a).unwrap(), &b);
        assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn depolarizing_power_composes_affinely() {
        let p = 0.3;
        let sq = QuantumChannel::depolarizing(2, p).unwrap().power(2).unwrap();
        let direct = QuantumChannel::depolarizing(2, 1.0 - (1.0 - p) * (1.0 - p)).unwrap();
        assert!(close(sq.superop().matrix(), direct.superop().matrix(), 1e-14));
        let id = QuantumChannel::identity(2).power(7).unwrap();
        assert!(close(id.superop().matrix(), &CMatrix::identity(4, 4), 1e-15));
        assert!(QuantumChannel::identity(2).power(0).is_err());
    }

    #[test]
    fn fixed_points() {
        let pi = QuantumChannel::depolarizing(2, 0.5).unwrap().fixed_point().unwrap();
        assert!(close(pi.matrix(), &CMatrix::identity(2, 2).scale(0.5), 1e-12));
        let pi = QuantumChannel::embedded_classical(&sym_chain(0.3)).unwrap().fixed_point().unwrap();
        assert!(close(pi.matrix(), &CMatrix::identity(2, 2).scale(0.5), 1e-12));
        let u = haar_unitary(2, &mut rng_from_seed(5));
        let e = QuantumChannel::unitary(u, "u").unwrap();
        assert!(matches!(e.fixed_point(), Err(Error::DegenerateFixedSpace(_))));
    }

    #[test]
    fn primitivity_examples() {
        let r = QuantumChannel::depolarizing(2, 0.5).unwrap().is_primitive(1e-8).unwrap();
        assert!(r.is_primitive);
        assert_abs_diff_eq!(r.spectral_gap, 0.5, epsilon = 1e-12);
        let x = pauli_matrices()[1].clone();
        let r = QuantumChannel::unitary(x, "X").unwrap().is_primitive(1e-8).unwrap();
        assert!(!r.is_primitive);
        assert!(r.peripheral_count > 1);
        let r = QuantumChannel::depolarizing(2, 1.0).unwrap().is_primitive(1e-8).unwrap();
        assert!(r.is_primitive);
        assert_abs_diff_eq!(r.spectral_gap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn embedded_classical_examples() {
        let pinch = QuantumChannel::embedded_classical(&DMatrix::identity(2, 2)).unwrap();
        let plus = DensityMatrix::pure(&CVector::from_vec(vec![real(1.0), real(1.0)])).unwrap();
        let out = pinch.apply(&plus).unwrap();
        assert!(close(out.matrix(), &CMatrix::identity(2, 2).scale(0.5), 1e-14));
        let e = QuantumChannel::embedded_classical(&sym_chain(0.3)).unwrap();
        let out = e.apply(&DensityMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, 0.3, epsilon = 1e-14);
        let out = e.apply(&plus).unwrap();
        assert!(close(out.matrix(), &CMatrix::identity(2, 2).scale(0.5), 1e-14));
        let bad = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.4, 0.7]);
        assert!(matches!(QuantumChannel::embedded_classical(&bad), Err(Error::NotStochastic(_))));
    }

    #[test]
    fn pauli_examples() {
        let id = QuantumChannel::pauli([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(id.superop().matrix(), &CMatrix::identity(4, 4), 1e-15));
        let p = 0.4;
        let e = QuantumChannel::pauli([1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0]).unwrap();
        let dep = QuantumChannel::depolarizing(2, p).unwrap();
        assert!(close(e.superop().matrix(), dep.superop().matrix(), 1e-14));
        let half = QuantumChannel::pauli([0.5, 0.5, 0.0, 0.0]).unwrap();
        let moduli: Vec<f64> = half.spectrum().unwrap().iter().map(|z| z.norm()).collect();
        assert_abs_diff_eq!(moduli[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moduli[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moduli[2], 0.0, epsilon = 1e-12);
        assert!(!half.is_primitive(1e-8).unwrap().is_primitive);
        assert!(matches!(QuantumChannel::pauli([0.5, 0.6, 0.0, -0.1]), Err(Error::NotProbability(_))));
    }

    #[test]
    fn random_channel_properties() {
        let a = QuantumChannel::random(2, 4, 7).unwrap();
        let b = QuantumChannel::random(2, 4, 7).unwrap();
        assert_eq!(a.superop(), b.superop());
        assert!(a.cptp_diagnostics().unwrap().is_cptp(1e-9));
        let report = a.is_primitive(1e-8).unwrap();
        assert!(report.is_primitive);
        let u = QuantumChannel::random(2, 1, 3).unwrap();
        let k = &u.kraus().unwrap()[0];
        assert!(close(&(k.adjoint() * k), &CMatrix::identity(2, 2), 1e-12));
    }

    #[test]
    fn amplitude_damping_examples() {
        let e = QuantumChannel::amplitude_damping(1e-12, 0.25).unwrap();
        assert!(close(e.superop().matrix(), &CMatrix::identity(4, 4), 1e-5));
        let e = QuantumChannel::amplitude_damping(0.3, 0.25).unwrap();
        let pi = e.fixed_point().unwrap();
        assert!(pi.min_eigenvalue() > 0.2);
        assert_abs_diff_eq!(pi.matrix()[(0, 0)].re, 0.75, epsilon = 1e-10);
        assert!(matches!(QuantumChannel::amplitude_damping(0.0, 0.2), Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn superoperator_constructor_rejects_non_cp() {
        // transpose map is positive and trace preserving but not completely positive
        let mut t = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                t[(j + i * 2, i + j * 2)] = real(1.0);
            }
        }
        let s = Superoperator::from_matrix(2, t).unwrap();
        assert!(matches!(QuantumChannel::from_superoperator(s, "T"), Err(Error::NotCompletelyPositive(_))));
    }

    #[test]
    fn channel_spec_json() {
        let spec: ChannelSpec = serde_json::from_str(r#"{"kind":"depolarizing","p":0.5}"#).unwrap();
        assert_eq!(spec, ChannelSpec::Depolarizing { dim: 2, p: 0.5 });
        let e = spec.build().unwrap();
        assert_eq!(e.dim(), 2);
        let spec: ChannelSpec =
            serde_json::from_str(r#"{"kind":"kraus","kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#).unwrap();
        assert!(close(spec.build().unwrap().superop().matrix(), &CMatrix::identity(4, 4), 0.0));
        let spec: ChannelSpec =
            serde_json::from_str(r#"{"kind":"embedded_classical","w":[[0.7,0.3],[0.3,0.7]]}"#).unwrap();
        assert!(spec.build().is_ok());
        assert!(serde_json::from_str::<ChannelSpec>(r#"{"kind":"bogus"}"#).is_err());
    }
}
