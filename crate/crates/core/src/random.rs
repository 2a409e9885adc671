//! Seeded random ensembles: Ginibre matrices, Haar unitaries and induced-measure states.
//!
//! All generators take an explicit RNG; nothing here touches global state.

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMatrix, DensityMatrix, HermitianMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from a master seed.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the diagonal phases of R
/// divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = QR::new(ginibre(d, d, rng));
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if n > 0.0 {
            let phase = rjj / n;
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random full-rank state `AA†/Tr[AA†]` with Ginibre `A`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let a = ginibre(d, d, rng);
    DensityMatrix::new(&a * a.adjoint()).expect("Ginibre states are valid")
}

/// Random state whose spectrum is a uniformly drawn point of the simplex, rotated by `u`.
pub fn random_state_in_basis<R: Rng + ?Sized>(u: &CMatrix, rng: &mut R) -> DensityMatrix {
    let d = u.nrows();
    let p = random_probability(d, rng);
    let diag = HermitianMatrix::from_real_diagonal(&p).into_matrix();
    DensityMatrix::new(u * diag * u.adjoint()).expect("rotated diagonal state is valid")
}

/// Probability vector with entries bounded away from zero.
pub fn random_probability<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, d, rng);
    HermitianMatrix::hermitian_part(&g).expect("square")
}
