//! Dense Hermitian linear algebra on small complex matrices.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Operators are vectorized by
//! column stacking, which is also nalgebra's storage order, so that the superoperator of
//! `X -> A X B` is `transpose(B) ⊗ A`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Construction tolerance for density matrices.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest `‖H − H†‖_max` accepted before symmetrization is refused.
pub const HERMITICITY_LIMIT: f64 = 1e-6;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry of `M − M†`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 {
        return Err(Error::DimensionTooSmall { min: 1, got: 0 });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// A Hermitian matrix. Construction symmetrizes `(H + H†)/2` and remembers how far the
/// input was from Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    matrix: CMatrix,
    asymmetry: f64,
}

impl HermitianMatrix {
    /// Symmetrizes `m`. Fails when `m` is not square, has non-finite entries or is more
    /// than [`HERMITICITY_LIMIT`] away from Hermitian.
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        let asym = asymmetry(&m);
        if asym > HERMITICITY_LIMIT {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self { matrix: symmetrize(&m), asymmetry: asym })
    }

    /// Hermitian part of `m` regardless of how asymmetric the input is.
    pub fn hermitian_part(m: &CMatrix) -> Result<Self> {
        ensure_square(m)?;
        Ok(Self { matrix: symmetrize(m), asymmetry: asymmetry(m) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let matrix = CMatrix::from_fn(d, d, |i, j| if i == j { real(diag[i]) } else { C64::default() });
        Self { matrix, asymmetry: 0.0 }
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: CMatrix::identity(d, d), asymmetry: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Asymmetry of the matrix this value was built from.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        hermitian_eig(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s), asymmetry: self.asymmetry * s.abs() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V · diag(weights) · V†`.
    pub fn compose(&self, weights: &[f64]) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let w = weights[j];
            for i in 0..d {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.compose(&self.values)
    }

    /// `V · diag(φ(λ)) · V†`; fails if φ returns a non-finite value anywhere on the spectrum.
    pub fn map<F: Fn(f64) -> f64>(&self, phi: F) -> Result<CMatrix> {
        let mut w = Vec::with_capacity(self.dim());
        for &l in &self.values {
            let v = phi(l);
            if !v.is_finite() {
                return Err(Error::DomainError(l));
            }
            w.push(v);
        }
        Ok(self.compose(&w))
    }
}

/// Full eigendecomposition, eigenvalues ascending.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenSystem> {
    eig_of_hermitian_matrix(h.matrix())
}

/// Eigendecomposition of a matrix that the caller guarantees is Hermitian.
pub(crate) fn eig_of_hermitian_matrix(m: &CMatrix) -> Result<EigenSystem> {
    let d = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * d.max(1))
        .ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    Ok(EigenSystem { values, vectors })
}

/// Ascending eigenvalues only. The 2×2 case is solved in closed form because the
/// hockey-stick integrand calls this in a tight loop.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()).scale(0.5).norm();
        let mean = 0.5 * (a + d);
        let r = (0.5 * (a - d)).hypot(b);
        return Ok(vec![mean - r, mean + r]);
    }
    let mut values: Vec<f64> = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * m.nrows().max(1))
        .ok_or(Error::ConvergenceFailure)?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Functional calculus `V φ(Λ) V†`.
pub fn matrix_function<F: Fn(f64) -> f64>(h: &HermitianMatrix, phi: F) -> Result<HermitianMatrix> {
    let m = hermitian_eig(h)?.map(phi)?;
    Ok(HermitianMatrix { matrix: symmetrize(&m), asymmetry: 0.0 })
}

/// Positive part `V max(Λ, 0) V†` of the Jordan decomposition.
pub fn positive_part(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_function(h, |x| x.max(0.0))
}

/// Trace of the positive part, from eigenvalues only.
pub fn positive_part_trace(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.into_iter().filter(|&x| x > 0.0).sum())
}

/// Schatten order restricted to the three norms used in the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenOrder {
    One,
    Two,
    Infinity,
}

impl SchattenOrder {
    pub fn from_p(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self::One)
        } else if p == 2.0 {
            Ok(Self::Two)
        } else if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else {
            Err(Error::UnsupportedOrder(p))
        }
    }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let svd = SVD::new(a.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Schatten p-norm for p in {1, 2, ∞}.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    Ok(schatten(a, SchattenOrder::from_p(p)?))
}

pub fn schatten(a: &CMatrix, order: SchattenOrder) -> f64 {
    match order {
        SchattenOrder::Two => a.norm(),
        _ => {
            let s = singular_values(a);
            match order {
                SchattenOrder::One => s.iter().sum(),
                _ => s.first().copied().unwrap_or(0.0),
            }
        }
    }
}

/// Schatten norms of a Hermitian matrix from its spectrum.
pub fn hermitian_schatten(h: &CMatrix, order: SchattenOrder) -> Result<f64> {
    let ev = hermitian_eigenvalues(h)?;
    Ok(match order {
        SchattenOrder::One => ev.iter().map(|x| x.abs()).sum(),
        SchattenOrder::Two => ev.iter().map(|x| x * x).sum::<f64>().sqrt(),
        SchattenOrder::Infinity => ev.iter().fold(0.0f64, |m, x| m.max(x.abs())),
    })
}

/// Column-stacking vectorization.
pub fn vectorize(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

pub fn devectorize(v: &CVector, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, got: v.len() });
    }
    Ok(CMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Hilbert–Schmidt inner product `Tr[A† B]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Linear map on `d × d` operators, stored as a `d² × d²` matrix acting on
/// column-stacked vectorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim * dim, dim * dim) }
    }

    /// The map `X -> A X B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let d = ensure_square(a)?;
        if b.nrows() != d || b.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.nrows() });
        }
        Ok(Self { dim: d, matrix: b.transpose().kronecker(a) })
    }

    /// Left multiplication `X -> A X`.
    pub fn left(a: &CMatrix) -> Result<Self> {
        Self::sandwich(a, &CMatrix::identity(a.nrows(), a.nrows()))
    }

    /// Right multiplication `X -> X B`.
    pub fn right(b: &CMatrix) -> Result<Self> {
        Self::sandwich(&CMatrix::identity(b.nrows(), b.nrows()), b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.nrows() });
        }
        devectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    /// Hilbert–Schmidt adjoint.
    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    /// n-fold composition by repeated squaring; `power(0)` is the identity.
    pub fn power(&self, n: u32) -> Self {
        let mut result = CMatrix::identity(self.matrix.nrows(), self.matrix.ncols());
        let mut base = self.matrix.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Self { dim: self.dim, matrix: result }
    }

    pub fn frobenius(&self) -> f64 {
        self.matrix.norm()
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut j = CMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                // column of the superoperator for the matrix unit |a⟩⟨b|
                let col = self.matrix.column(a + b * d);
                for r in 0..d {
                    for s in 0..d {
                        j[(a * d + r, b * d + s)] = col[r + s * d];
                    }
                }
            }
        }
        j
    }
}

/// A validated density matrix together with its spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
    spectrum: EigenSystem,
    validation_tol: f64,
    clipped: f64,
    full_rank: bool,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        validate_density(entries, DEFAULT_TOL)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag).into_matrix())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0 / d as f64; d]).expect("maximally mixed state is valid")
    }

    /// Pure state `|ψ⟩⟨ψ|` for an arbitrary nonzero vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn spectrum(&self) -> &EigenSystem {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn validation_tol(&self) -> f64 {
        self.validation_tol
    }

    /// Magnitude of the most negative eigenvalue removed during validation.
    pub fn clipped(&self) -> f64 {
        self.clipped
    }

    pub fn asymmetry(&self) -> f64 {
        self.base.asymmetry()
    }

    /// Fails with `SingularReference` unless the state is full rank.
    pub fn require_full_rank(&self) -> Result<()> {
        if self.full_rank {
            Ok(())
        } else {
            Err(Error::SingularReference(self.min_eigenvalue()))
        }
    }

    /// `(1 − ε)ρ + ε·I/d`, always full rank for `ε > 0`.
    pub fn regularized(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::ParameterOutOfRange(format!("regularization weight {eps} not in [0, 1]")));
        }
        let d = self.dim();
        let m = self.matrix().scale(1.0 - eps) + CMatrix::identity(d, d).scale(eps / d as f64);
        validate_density(m, self.validation_tol)
    }

    /// Convex combination `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        validate_density(self.matrix().scale(lambda) + other.matrix().scale(1.0 - lambda), self.validation_tol)
    }

    /// `self^p` on the support (p may be negative only for full-rank states).
    pub fn power(&self, p: f64) -> Result<CMatrix> {
        if p < 0.0 {
            self.require_full_rank()?;
        }
        self.spectrum.map(|x| if x <= 0.0 { 0.0 } else { x.powf(p) })
    }

    /// Trace distance `‖self − other‖₁ / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let diff = self.matrix() - other.matrix();
        Ok(0.5 * hermitian_schatten(&diff, SchattenOrder::One)?)
    }
}

/// Validates a candidate density matrix: symmetrizes, clips eigenvalues at zero and
/// renormalizes the trace to one.
pub fn validate_density(entries: CMatrix, tol: f64) -> Result<DensityMatrix> {
    let d = ensure_square(&entries)?;
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: d });
    }
    let h = HermitianMatrix::new(entries)?;
    let eig = hermitian_eig(&h)?;
    let trace: f64 = eig.values.iter().sum();
    let min = eig.min();
    if min < -tol * trace.abs().max(1.0) {
        return Err(Error::NotPositive(min));
    }
    let clipped = (-min).max(0.0);
    let kept: f64 = eig.values.iter().map(|&x| x.max(0.0)).sum();
    if !(kept > f64::MIN_POSITIVE) {
        return Err(Error::TraceZero(trace));
    }
    let values: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0) / kept).collect();
    let matrix = if clipped > 0.0 {
        symmetrize(&eig.compose(&values))
    } else {
        h.matrix().unscale(kept)
    };
    let full_rank = values[0] > tol;
    let asym = h.asymmetry();
    Ok(DensityMatrix {
        base: HermitianMatrix { matrix, asymmetry: asym },
        spectrum: EigenSystem { values, vectors: eig.vectors },
        validation_tol: tol,
        clipped,
        full_rank,
    })
}

/// Relative modular operator `Δ_{P,Q}: X -> P X Q^{-1}`.
pub fn relative_modular(p: &DensityMatrix, q: &DensityMatrix) -> Result<Superoperator> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: q.dim() });
    }
    let q_inv = q.power(-1.0)?;
    Superoperator::sandwich(p.matrix(), &q_inv)
}

/// `σ^{-1/2} ρ σ^{-1/2}`, the operator whose spectrum carries the generalized
/// eigenvalues of the pencil `(ρ, σ)`.
pub fn sandwiched_ratio(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<HermitianMatrix> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    let s = sigma.power(-0.5)?;
    HermitianMatrix::hermitian_part(&(&s * rho.matrix() * &s))
}
