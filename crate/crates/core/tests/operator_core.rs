use proptest::prelude::*;
use qcontract::linalg::{
    c, hermitian_eig, hermitian_schatten, matrix_function, positive_part, sandwiched_ratio, schatten, vectorize,
    SchattenOrder,
};
use qcontract::random::{ginibre, haar_unitary, random_density, random_hermitian, rng_from_seed};
use qcontract::{CMatrix, HermitianMatrix, Superoperator};

fn spectral_norm(m: &CMatrix) -> f64 {
    schatten(m, SchattenOrder::Infinity)
}

#[test]
fn eigendecomposition_reconstructs() {
    let mut rng = rng_from_seed(1);
    for d in 2..=4 {
        for _ in 0..10 {
            let h = random_hermitian(d, &mut rng);
            let eig = hermitian_eig(&h).unwrap();
            let err = spectral_norm(&(h.matrix() - eig.reconstruct()));
            assert!(err <= 1e-10 * spectral_norm(h.matrix()).max(1.0));
            let gram = eig.vectors.adjoint() * &eig.vectors;
            assert!(spectral_norm(&(gram - CMatrix::identity(d, d))) <= 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn matrix_function_ignores_basis_choice_in_degenerate_spectrum() {
    // spectrum {1, 1, 3}: exp agrees with the interpolating polynomial through the
    // distinct eigenvalues, whatever basis the eigensolver picks inside the 2-d eigenspace
    let mut rng = rng_from_seed(2);
    for _ in 0..5 {
        let u = haar_unitary(3, &mut rng);
        let diag = HermitianMatrix::from_real_diagonal(&[1.0, 1.0, 3.0]).into_matrix();
        let h = HermitianMatrix::new(&u * diag * u.adjoint()).unwrap();
        let f = matrix_function(&h, f64::exp).unwrap();
        let (e1, e3) = (1f64.exp(), 3f64.exp());
        let slope = (e3 - e1) / 2.0;
        let ident = CMatrix::identity(3, 3);
        let poly = ident.scale(e1) + (h.matrix() - &ident).scale(slope);
        assert!(spectral_norm(&(f.matrix() - poly)) <= 1e-10 * e3);
    }
}

#[test]
fn jordan_decomposition() {
    let mut rng = rng_from_seed(3);
    for d in 2..=4 {
        let h = random_hermitian(d, &mut rng);
        let pos = positive_part(&h).unwrap();
        let neg = positive_part(&h.neg()).unwrap();
        assert!(spectral_norm(&(pos.matrix() - neg.matrix() - h.matrix())) <= 1e-10);
        let tn = hermitian_schatten(h.matrix(), SchattenOrder::One).unwrap();
        assert!((pos.trace() + neg.trace() - tn).abs() <= 1e-10);
    }
}

#[test]
fn schatten_norms_order() {
    let mut rng = rng_from_seed(4);
    for d in 2..=4 {
        let x = random_hermitian(d, &mut rng);
        let one = hermitian_schatten(x.matrix(), SchattenOrder::One).unwrap();
        let inf = hermitian_schatten(x.matrix(), SchattenOrder::Infinity).unwrap();
        assert!(inf <= one + 1e-12 && one <= d as f64 * inf + 1e-12);
    }
}

#[test]
fn sandwiched_ratio_deviation_bound() {
    let mut rng = rng_from_seed(5);
    for k in 0..30 {
        let d = 2 + k % 3;
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let t = sandwiched_ratio(&rho, &sigma).unwrap();
        let lhs = hermitian_schatten(&(t.matrix() - CMatrix::identity(d, d)), SchattenOrder::Infinity).unwrap();
        let rhs = hermitian_schatten(&(rho.matrix() - sigma.matrix()), SchattenOrder::Infinity).unwrap()
            / sigma.min_eigenvalue();
        assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vectorization_is_a_homomorphism(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = rng_from_seed(seed);
        let (a, b, x) = (ginibre(d, d, &mut rng), ginibre(d, d, &mut rng), ginibre(d, d, &mut rng));
        let s = Superoperator::sandwich(&a, &b).unwrap();
        let lhs = s.matrix() * vectorize(&x);
        let rhs = vectorize(&(&a * &x * &b));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + a.norm() * b.norm() * x.norm()));
    }

    #[test]
    fn density_validation_accepts_mixtures(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(3, &mut rng);
        let sigma = random_density(3, &mut rng);
        let mixed = rho.mix(&sigma, lambda).unwrap();
        prop_assert!((mixed.matrix().trace() - c(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!(mixed.min_eigenvalue() >= 0.0);
    }
}
