//! Globally adaptive Gauss–Kronrod (7/15) quadrature over a list of breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Error relative to the result above which running out of intervals is a failure.
    pub failure_rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-300, max_intervals: 400, failure_rel_tol: 1e-6 }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[points[0], points[last]]`, treating every interior point as a
/// breakpoint. Points must be non-decreasing; zero-length pieces are skipped.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadratureOptions) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            let (value, error) = gk15(&mut f, a, b);
            evaluations += 15;
            heap.push(Piece { a, b, value, error });
        }
    }
    let total = |h: &BinaryHeap<Piece>| h.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    let mut resolved: Vec<Piece> = Vec::new();
    loop {
        let (mut value, mut error) = total(&heap);
        for p in &resolved {
            value += p.value;
            error += p.error;
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if !value.is_finite() {
            return Err(Error::QuadratureFailure { value, error });
        }
        let intervals = heap.len() + resolved.len();
        if error <= target || heap.is_empty() {
            return Ok(QuadratureResult { value, error, evaluations, intervals });
        }
        if intervals >= opts.max_intervals {
            if error <= opts.failure_rel_tol * value.abs() {
                return Ok(QuadratureResult { value, error, evaluations, intervals });
            }
            return Err(Error::QuadratureFailure { value, error });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 1e-14 * worst.a.abs().max(1.0) {
            // cannot subdivide further in floating point
            resolved.push(worst);
            continue;
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&mut f, a, b);
            evaluations += 15;
            heap.push(Piece { a, b, value, error });
        }
    }
}
