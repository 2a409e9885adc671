use nalgebra::DMatrix;
use qcontract::channels::cptp_diagnostics;
use qcontract::linalg::{hermitian_schatten, SchattenOrder};
use qcontract::random::{random_density, random_probability, rng_from_seed};
use qcontract::{CMatrix, DensityMatrix, QuantumChannel};

fn fixtures() -> Vec<QuantumChannel> {
    vec![
        QuantumChannel::depolarizing(2, 0.5).unwrap(),
        QuantumChannel::depolarizing(3, 0.3).unwrap(),
        QuantumChannel::pauli([0.7, 0.1, 0.15, 0.05]).unwrap(),
        QuantumChannel::embedded_classical(&DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7])).unwrap(),
        QuantumChannel::amplitude_damping(0.3, 0.25).unwrap(),
        QuantumChannel::random(2, 2, 7).unwrap(),
        QuantumChannel::random(2, 2, 11).unwrap(),
        QuantumChannel::random(3, 2, 13).unwrap(),
    ]
}

#[test]
fn powers_and_compositions_stay_cptp() {
    let chans = fixtures();
    for ch in &chans {
        for n in [2, 5] {
            assert!(ch.power(n).unwrap().cptp_diagnostics().unwrap().is_cptp(1e-8), "{}^{n}", ch.label());
        }
    }
    let comp = chans[0].compose(&chans[2]).unwrap();
    assert!(cptp_diagnostics(comp.superop()).unwrap().is_cptp(1e-8));
}

#[test]
fn spectrum_inside_unit_disc() {
    for ch in fixtures() {
        let ev = ch.spectrum().unwrap();
        assert!(ev.iter().all(|z| z.norm() <= 1.0 + 1e-9), "{}", ch.label());
        assert!((ev[0].norm() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn adjoint_is_unital() {
    for ch in fixtures() {
        let d = ch.dim();
        let out = ch.adjoint().apply(&CMatrix::identity(d, d)).unwrap();
        assert!((out - CMatrix::identity(d, d)).norm() <= 1e-9, "{}", ch.label());
    }
}

#[test]
fn iterates_converge_uniformly() {
    for ch in fixtures() {
        let report = ch.is_primitive(1e-8).unwrap();
        assert!(report.is_primitive, "{}", ch.label());
        let pi = ch.fixed_point().unwrap();
        let d = ch.dim();
        let burn_in = d.pow(4);
        let horizon = ((1e-6f64).ln() / (1.0 - report.spectral_gap).ln()).ceil() as usize + burn_in;
        let mut rng = rng_from_seed(77);
        let mut states: Vec<CMatrix> = (0..100).map(|_| random_density(d, &mut rng).matrix().clone()).collect();
        let mut previous = f64::INFINITY;
        for n in 1..=horizon {
            let mut worst = 0.0f64;
            for x in states.iter_mut() {
                *x = ch.apply_operator(x).unwrap();
                worst = worst.max(hermitian_schatten(&(&*x - pi.matrix()), SchattenOrder::Infinity).unwrap());
            }
            if n >= burn_in {
                assert!(worst <= previous * (1.0 + 1e-9) + 1e-15, "{} not monotone at n={n}", ch.label());
            }
            previous = worst;
        }
        assert!(previous < 1e-6, "{}: {previous:.2e} after {horizon} steps", ch.label());
    }
}

#[test]
fn embedded_chain_acts_classically_on_diagonals() {
    let w = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.6, 0.2, 0.2, 0.2, 0.7]);
    let ch = QuantumChannel::embedded_classical(&w).unwrap();
    let mut rng = rng_from_seed(9);
    for _ in 0..5 {
        let p = random_probability(3, &mut rng);
        let out = ch.apply(&DensityMatrix::from_real_diagonal(&p).unwrap()).unwrap();
        for i in 0..3 {
            let expected: f64 = (0..3).map(|j| w[(i, j)] * p[j]).sum();
            assert!((out.matrix()[(i, i)].re - expected).abs() <= 1e-14);
        }
        assert!(out.matrix()[(0, 1)].norm() <= 1e-15);
    }
}

#[test]
fn amplitude_damping_fixture() {
    let ch = QuantumChannel::amplitude_damping(0.3, 0.25).unwrap();
    let pi = ch.fixed_point().unwrap();
    assert!(pi.min_eigenvalue() > 0.2);
    assert!((pi.matrix()[(0, 0)].re - 0.75).abs() <= 1e-10);
}
