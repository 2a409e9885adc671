//! Generator functions: convex `f` for f-divergences and standard monotone `g` for the
//! χ²_g family.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which quantum extension of a classical f-divergence to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Hockey-stick integral representation.
    Ht,
    /// Modular-operator (quasi-entropy) form.
    Petz,
    /// Maximal f-divergence.
    Matsumoto,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Ht, Family::Petz, Family::Matsumoto];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Ht => "ht",
            Family::Petz => "petz",
            Family::Matsumoto => "matsumoto",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ht" => Some(Family::Ht),
            "petz" => Some(Family::Petz),
            "matsumoto" => Some(Family::Matsumoto),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
}

/// A convex generator `f` with `f(1) = f'(1) = 0`, its first three derivatives and the
/// divergence family it is evaluated with.
#[derive(Clone)]
pub struct FDivergenceSpec {
    pub name: String,
    f: ScalarFn,
    f1: ScalarFn,
    f2: ScalarFn,
    f3: ScalarFn,
    pub operator_convex: bool,
    /// `C_f` with `D_f(p‖q) ≥ C_f ‖p − q‖₁²` for all distributions, when known.
    pub pinsker_constant: Option<f64>,
    pub family: Family,
}

impl fmt::Debug for FDivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FDivergenceSpec")
            .field("name", &self.name)
            .field("operator_convex", &self.operator_convex)
            .field("pinsker_constant", &self.pinsker_constant)
            .field("family", &self.family)
            .finish()
    }
}

impl FDivergenceSpec {
    /// Builds and numerically checks a generator: normalization at 1, convexity on a grid
    /// and finite-difference consistency of the supplied derivatives.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        f: ScalarFn,
        f1: ScalarFn,
        f2: ScalarFn,
        f3: ScalarFn,
        operator_convex: bool,
        pinsker_constant: Option<f64>,
        family: Family,
    ) -> Result<Self> {
        let spec = Self { name: name.into(), f, f1, f2, f3, operator_convex, pinsker_constant, family };
        spec.check()?;
        Ok(spec)
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidGenerator { name: self.name.clone(), reason }
    }

    fn check(&self) -> Result<()> {
        if self.f(1.0).abs() > 1e-12 {
            return Err(self.invalid(format!("f(1) = {}", self.f(1.0))));
        }
        if self.f1(1.0).abs() > 1e-12 {
            return Err(self.invalid(format!("f'(1) = {}", self.f1(1.0))));
        }
        if !(self.f2(1.0) > 0.0) {
            return Err(self.invalid(format!("f''(1) = {} is not positive", self.f2(1.0))));
        }
        let fd_ok = |exact: f64, approx: f64| (exact - approx).abs() <= 1e-6 * exact.abs().max(1.0);
        for x in log_grid(0.1, 10.0, 41) {
            let h = 1e-4 * x;
            if self.f2(x) < -1e-12 {
                return Err(self.invalid(format!("not convex at {x}")));
            }
            let second_diff = self.f(x + h) - 2.0 * self.f(x) + self.f(x - h);
            if second_diff < -1e-12 * self.f(x).abs().max(1.0) {
                return Err(self.invalid(format!("not convex at {x}")));
            }
            let checks = [
                ("f'", self.f1(x), (self.f(x + h) - self.f(x - h)) / (2.0 * h)),
                ("f''", self.f2(x), (self.f1(x + h) - self.f1(x - h)) / (2.0 * h)),
                ("f'''", self.f3(x), (self.f2(x + h) - self.f2(x - h)) / (2.0 * h)),
            ];
            for (what, exact, approx) in checks {
                if !fd_ok(exact, approx) {
                    return Err(self.invalid(format!("{what}({x}) = {exact} disagrees with finite difference {approx}")));
                }
            }
        }
        Ok(())
    }

    /// `f(x) = x ln x − x + 1` (nats), Pinsker constant 1/2.
    pub fn kl() -> Self {
        Self::new(
            "kl",
            Arc::new(kl_generator),
            Arc::new(|x: f64| x.ln()),
            Arc::new(|x: f64| 1.0 / x),
            Arc::new(|x: f64| -1.0 / (x * x)),
            true,
            Some(0.5),
            Family::Petz,
        )
        .expect("kl generator is valid")
    }

    /// `f(x) = (x − 1)²`; Cauchy–Schwarz gives `χ² ≥ ‖p − q‖₁²`.
    pub fn chi_square() -> Self {
        Self::new(
            "chi2",
            Arc::new(|x: f64| (x - 1.0) * (x - 1.0)),
            Arc::new(|x: f64| 2.0 * (x - 1.0)),
            Arc::new(|_| 2.0),
            Arc::new(|_| 0.0),
            true,
            Some(1.0),
            Family::Petz,
        )
        .expect("chi2 generator is valid")
    }

    /// `f(x) = (√x − 1)²`; `H² ≥ ‖p − q‖₁²/4`.
    pub fn hellinger() -> Self {
        Self::new(
            "hellinger",
            Arc::new(|x: f64| {
                let s = x.sqrt() + 1.0;
                (x - 1.0) * (x - 1.0) / (s * s)
            }),
            Arc::new(|x: f64| 1.0 - 1.0 / x.sqrt()),
            Arc::new(|x: f64| 0.5 * x.powf(-1.5)),
            Arc::new(|x: f64| -0.75 * x.powf(-2.5)),
            true,
            Some(0.25),
            Family::Petz,
        )
        .expect("hellinger generator is valid")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        f_catalog().into_iter().find(|s| s.name == name)
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn f1(&self, x: f64) -> f64 {
        (self.f1)(x)
    }

    pub fn f2(&self, x: f64) -> f64 {
        (self.f2)(x)
    }

    pub fn f3(&self, x: f64) -> f64 {
        (self.f3)(x)
    }

    /// Classical Csiszár divergence `Σ q_i f(p_i/q_i)` for strictly positive `q`.
    pub fn classical(&self, p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).map(|(&pi, &qi)| qi * self.f(pi / qi)).sum()
    }
}

/// `x ln x − x + 1`, with a Taylor series near 1 to avoid cancellation.
fn kl_generator(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let d = x - 1.0;
    if d.abs() < 1e-3 {
        // Σ_{k≥2} (−d)^k / (k(k−1))
        let mut sum = 0.0;
        let mut pow = d * d;
        for k in 2..10 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * pow / (k * (k - 1)) as f64;
            pow *= d;
        }
        return sum;
    }
    x * x.ln() - d
}

/// The shipped generators: KL, χ² and squared Hellinger.
pub fn f_catalog() -> Vec<FDivergenceSpec> {
    vec![FDivergenceSpec::kl(), FDivergenceSpec::chi_square(), FDivergenceSpec::hellinger()]
}

/// A weight function `g` for non-commutative division by σ. Members of the standard
/// monotone class are normalized, positive, decreasing and satisfy `g(1/x) = x·g(x)`;
/// the constant GNS weight is carried by the same type with `standard = false`.
#[derive(Clone)]
pub struct StandardMonotoneFn {
    pub name: String,
    g: ScalarFn,
    /// Coefficients of `g(1 + δ) ≈ Σ c_k δ^k`, used when `|δ| < series_radius`.
    pub series_at_one: Vec<f64>,
    pub series_radius: f64,
    pub standard: bool,
}

impl fmt::Debug for StandardMonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StandardMonotoneFn")
            .field("name", &self.name)
            .field("series_at_one", &self.series_at_one)
            .field("standard", &self.standard)
            .finish()
    }
}

impl StandardMonotoneFn {
    /// Builds a standard monotone function and checks normalization, positivity,
    /// monotone decrease and the symmetry `g(1/x) = x·g(x)` on a grid.
    pub fn new(name: impl Into<String>, g: ScalarFn, series_at_one: Vec<f64>, series_radius: f64) -> Result<Self> {
        let s = Self { name: name.into(), g, series_at_one, series_radius, standard: true };
        s.check()?;
        Ok(s)
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidGenerator { name: self.name.clone(), reason }
    }

    fn check(&self) -> Result<()> {
        if (self.eval(1.0) - 1.0).abs() > 1e-12 {
            return Err(self.invalid(format!("g(1) = {}", self.eval(1.0))));
        }
        let grid: Vec<f64> = log_grid(0.05, 20.0, 81).collect();
        let mut prev = f64::INFINITY;
        for &x in &grid {
            let gx = self.eval(x);
            if !(gx > 0.0) || !gx.is_finite() {
                return Err(self.invalid(format!("g({x}) = {gx} is not positive")));
            }
            if gx > prev * (1.0 + 1e-12) {
                return Err(self.invalid(format!("g increases at {x}")));
            }
            prev = gx;
            let lhs = self.eval(1.0 / x);
            let rhs = x * gx;
            if (lhs - rhs).abs() > 1e-10 * rhs.abs().max(1.0) {
                return Err(self.invalid(format!("g(1/x) = {lhs} but x·g(x) = {rhs} at x = {x}")));
            }
        }
        Ok(())
    }

    /// `g(x) = (x + 1)/(2x)`; the χ²_g it induces is `Tr[σ^{-1}(ρ − σ)²]`.
    pub fn g_max() -> Self {
        Self::new("g_max", Arc::new(|x: f64| (x + 1.0) / (2.0 * x)), vec![1.0], 0.0).expect("g_max is standard")
    }

    /// `g(x) = ln x/(x − 1)`, Kubo–Mori–Bogoliubov weight.
    pub fn g_kmb() -> Self {
        Self::new(
            "g_kmb",
            Arc::new(|x: f64| {
                let d = x - 1.0;
                d.ln_1p() / d
            }),
            vec![1.0, -0.5, 1.0 / 3.0],
            1e-4,
        )
        .expect("g_kmb is standard")
    }

    /// Constant weight 1 (GNS detailed balance). Not symmetric, hence not standard.
    pub fn gns() -> Self {
        Self { name: "gns".into(), g: Arc::new(|_| 1.0), series_at_one: vec![1.0], series_radius: 0.0, standard: false }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "gns" => Some(Self::gns()),
            _ => g_catalog().into_iter().find(|g| g.name == name),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - 1.0;
        if d == 0.0 {
            return self.series_at_one.first().copied().unwrap_or(1.0);
        }
        if d.abs() < self.series_radius {
            return self.series_at_one.iter().rev().fold(0.0, |acc, c| acc * d + c);
        }
        (self.g)(x)
    }
}

/// The shipped standard monotone functions.
pub fn g_catalog() -> Vec<StandardMonotoneFn> {
    vec![StandardMonotoneFn::g_max(), StandardMonotoneFn::g_kmb()]
}

/// `κ_f(x) = (f(x) + x f(1/x)) / (f''(1)(x − 1)²)`, the weight governing the local
/// behaviour of the Petz divergence built from `f`.
pub fn kappa_for_petz(spec: &FDivergenceSpec) -> Result<StandardMonotoneFn> {
    if !spec.operator_convex {
        return Err(Error::NotOperatorConvex(spec.name.clone()));
    }
    let c2 = spec.f2(1.0);
    let f = spec.f.clone();
    let kappa = move |x: f64| {
        let d = x - 1.0;
        (f(x) + x * f(1.0 / x)) / (c2 * d * d)
    };
    StandardMonotoneFn::new(format!("kappa_{}", spec.name), Arc::new(kappa), vec![1.0, -0.5], 1e-6)
}

/// The χ² weight whose local expansion matches `family` with generator `spec`.
pub fn local_weight(spec: &FDivergenceSpec) -> Result<StandardMonotoneFn> {
    match spec.family {
        Family::Ht => Ok(StandardMonotoneFn::g_kmb()),
        Family::Matsumoto => Ok(StandardMonotoneFn::g_max()),
        Family::Petz => kappa_for_petz(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn catalog_examples() {
        assert_eq!(StandardMonotoneFn::g_max().eval(1.0), 1.0);
        assert_abs_diff_eq!(StandardMonotoneFn::g_kmb().eval(2.0), std::f64::consts::LN_2, epsilon = 1e-15);
        let g = StandardMonotoneFn::g_max();
        assert_abs_diff_eq!(g.eval(1.0 / 3.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(3.0 * g.eval(3.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn kmb_series_is_continuous() {
        let g = StandardMonotoneFn::g_kmb();
        for d in [9.9e-5f64, -9.9e-5, 1.01e-4, -1.01e-4, 1e-7] {
            let direct = d.ln_1p() / d;
            assert_abs_diff_eq!(g.eval(1.0 + d), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn gns_weight_is_not_standard() {
        let gns = StandardMonotoneFn::gns();
        assert!(!gns.standard);
        let err = StandardMonotoneFn::new("one", Arc::new(|_| 1.0), vec![1.0], 0.0);
        assert!(matches!(err, Err(Error::InvalidGenerator { .. })));
    }

    #[test]
    fn kappa_examples() {
        let k = kappa_for_petz(&FDivergenceSpec::chi_square()).unwrap();
        assert_abs_diff_eq!(k.eval(3.0), 2.0 / 3.0, epsilon = 1e-14);
        let k = kappa_for_petz(&FDivergenceSpec::kl()).unwrap();
        assert_abs_diff_eq!(k.eval(2.0), std::f64::consts::LN_2, epsilon = 1e-14);
        assert_eq!(k.eval(1.0), 1.0);
    }

    #[test]
    fn kappa_matches_catalog_on_grid() {
        let pairs = [
            (FDivergenceSpec::chi_square(), StandardMonotoneFn::g_max()),
            (FDivergenceSpec::kl(), StandardMonotoneFn::g_kmb()),
        ];
        for (f, g) in pairs {
            let k = kappa_for_petz(&f).unwrap();
            for x in log_grid(0.05, 20.0, 57) {
                assert_abs_diff_eq!(k.eval(x), g.eval(x), epsilon = 1e-10);
            }
        }
        // Hellinger yields the Wigner–Yanase weight 4/(1 + √x)²
        let k = kappa_for_petz(&FDivergenceSpec::hellinger()).unwrap();
        for x in log_grid(0.05, 20.0, 57) {
            assert_abs_diff_eq!(k.eval(x), 4.0 / (1.0 + x.sqrt()).powi(2), epsilon = 1e-10);
        }
    }

    #[test]
    fn generator_validation_rejects_bad_input() {
        let bad = FDivergenceSpec::new(
            "shifted",
            Arc::new(|x: f64| (x - 1.0) * (x - 1.0) + 0.1),
            Arc::new(|x: f64| 2.0 * (x - 1.0)),
            Arc::new(|_| 2.0),
            Arc::new(|_| 0.0),
            true,
            None,
            Family::Ht,
        );
        assert!(matches!(bad, Err(Error::InvalidGenerator { .. })));
        let wrong_derivative = FDivergenceSpec::new(
            "wrong",
            Arc::new(|x: f64| (x - 1.0) * (x - 1.0)),
            Arc::new(|x: f64| 2.0 * (x - 1.0)),
            Arc::new(|_| 3.0),
            Arc::new(|_| 0.0),
            true,
            None,
            Family::Ht,
        );
        assert!(wrong_derivative.is_err());
    }

    #[test]
    fn kl_series_agrees_with_direct_formula() {
        for x in [0.998_f64, 0.9995, 1.0004, 1.002] {
            assert_abs_diff_eq!(kl_generator(x), x * x.ln() - x + 1.0, epsilon = 1e-15);
        }
        assert_eq!(kl_generator(0.0), 1.0);
    }

    #[test]
    fn classical_kl_of_diagonal_pair() {
        let v = FDivergenceSpec::kl().classical(&[0.6, 0.4], &[0.5, 0.5]);
        let expected = 0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
    }
}
