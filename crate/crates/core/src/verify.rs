//! Numerical checks of the identities between the operators, each producing
//! a [`VerifyReport`].
//!
//! All checks run in `f64`. Random inputs are uniform on `[−1, 1]` from a
//! seeded ChaCha8 generator and the seed is recorded in the report.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::convolution::{delta_convolution, nabla_convolution};
use crate::error::{Error, Result};
use crate::grid::{BivariateGridFunction, GridFunction};
use crate::kernels::{ml_values, Kernel, MlParams};
use crate::numerics::{falling_factorial, gamma, rising_factorial};
use crate::operators::{
    ab_lambda, classical_frac_diff, classical_frac_sum, gen_caputo_diff, gen_rl_diff, gen_sum,
    Flavor, Mode,
};

/// Absolute tolerance for identities between finite sums.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Tolerance where Mittag-Leffler values enter.
pub const ML_TOL: f64 = 1e-8;
/// Relative tolerance of the power rules.
pub const POWER_RULE_TOL: f64 = 1e-9;
/// FTC tolerance, as a multiple of `max|y|`.
pub const FTC_TOL: f64 = 1e-8;
/// Tolerance used to certify a pair before the FTC checks.
pub const CLASS_TOL: f64 = 1e-10;
/// Largest horizon of the ML shift checks in suite runs; `E_{1,1}(0.5, t) = 2^t`
/// outgrows the relative accuracy of the comparison past this point.
pub const ML_SHIFT_MAX_N: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub identity: String,
    pub params: Map<String, Value>,
    /// First and last checked offset.
    pub range: [usize; 2],
    #[serde(skip)]
    pub per_point_error: Vec<f64>,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub bit_exact: Option<bool>,
    pub verdict: Verdict,
    pub seed: Option<u64>,
}

impl VerifyReport {
    /// Builds a report from per-offset errors starting at `first`.
    ///
    /// Passes iff every error is at most `tolerance` (a NaN error fails) and,
    /// when `bit_exact` is `Some`, it is `Some(true)`.
    pub fn new(
        identity: impl Into<String>,
        params: Value,
        first: usize,
        per_point_error: Vec<f64>,
        tolerance: f64,
        bit_exact: Option<bool>,
        seed: Option<u64>,
    ) -> Self {
        let max_abs_error = per_point_error.iter().fold(0.0_f64, |m, &e| {
            if e.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(e)
            }
        });
        let within = max_abs_error <= tolerance;
        let verdict = if within && bit_exact != Some(false) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let params = match params {
            Value::Object(map) => map,
            Value::Null => Map::new(),
            other => {
                let mut map = Map::new();
                map.insert("value".into(), other);
                map
            }
        };
        let last = first + per_point_error.len().saturating_sub(1);
        VerifyReport {
            identity: identity.into(),
            params,
            range: [first, last],
            per_point_error,
            max_abs_error,
            tolerance,
            bit_exact,
            verdict,
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} {} offsets {}..={} max error {:.3e} (tol {:.1e})",
            self.identity,
            Value::Object(self.params.clone()),
            self.range[0],
            self.range[1],
            self.max_abs_error,
            self.tolerance
        )?;
        if let Some(exact) = self.bit_exact {
            write!(f, " bit-exact {exact}")?;
        }
        Ok(())
    }
}

/// The report in a list with the largest error relative to its tolerance (failures first).
pub fn worst(reports: &[VerifyReport]) -> Option<&VerifyReport> {
    let key = |r: &VerifyReport| {
        let ratio = if r.tolerance > 0.0 {
            r.max_abs_error / r.tolerance
        } else if r.max_abs_error > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        (
            !r.passed(),
            if ratio.is_nan() { f64::INFINITY } else { ratio },
        )
    };
    reports.iter().max_by(|a, b| {
        key(a)
            .partial_cmp(&key(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// `n + 1` values uniform on `[−1, 1]` at offsets `0..=n` of `base`.
pub fn random_grid_function(seed: u64, base: f64, n: usize) -> GridFunction<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::from_parts_unchecked(base, (0..=n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

/// A tabulated kernel with `len` values uniform on `[−1, 1]`.
pub fn random_kernel(seed: u64, len: usize) -> Kernel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Kernel::tabulated(
        &format!("random#{seed}"),
        (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
    )
    .expect("finite values")
}

/// Which convolution identity a kernel pair is claimed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassTarget {
    /// `(p ∗ q)^∇ ≡ 1`.
    UnitNabla,
    /// `(p ∗ q)^Δ ≡ 1`.
    UnitDelta,
    /// `(p ∗ q)^∇(x0 + k) = E_{α,α+1}(λ, k)`.
    Ab { alpha: f64, lambda: f64 },
    /// `(p ∗ q)^∇(x0 + k) = (1 − α − (1−α)^(k+1)) / α`.
    Cf { alpha: f64 },
}

impl ClassTarget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassTarget::Ab { alpha, lambda } => {
                MlParams::new(alpha, alpha + 1.0, lambda).map(|_| ())
            }
            ClassTarget::Cf { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::order("cf class (requires 0 < α < 1)", alpha))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassTarget::UnitNabla => "unit_nabla",
            ClassTarget::UnitDelta => "unit_delta",
            ClassTarget::Ab { .. } => "ab_class",
            ClassTarget::Cf { .. } => "cf_class",
        }
    }

    /// Target values at offsets `0..=n` (offset 0 unused).
    fn targets(&self, n: usize) -> Result<Vec<f64>> {
        Ok(match *self {
            ClassTarget::UnitNabla | ClassTarget::UnitDelta => vec![1.0; n + 1],
            ClassTarget::Ab { alpha, lambda } => {
                ml_values(&MlParams::new(alpha, alpha + 1.0, lambda)?, n)?
            }
            ClassTarget::Cf { alpha } => (0..=n)
                .map(|k| (1.0 - alpha - (1.0 - alpha).powi(k as i32 + 1)) / alpha)
                .collect(),
        })
    }

    fn params(&self) -> Value {
        match *self {
            ClassTarget::Ab { alpha, lambda } => json!({ "alpha": alpha, "lambda": lambda }),
            ClassTarget::Cf { alpha } => json!({ "alpha": alpha }),
            _ => json!({}),
        }
    }
}

/// Two kernels and the class they are claimed to belong to.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub p: Kernel<f64>,
    pub q: Kernel<f64>,
    pub class: ClassTarget,
}

impl KernelPair {
    pub fn new(p: Kernel<f64>, q: Kernel<f64>, class: ClassTarget) -> Result<Self> {
        class.validate()?;
        Ok(KernelPair { p, q, class })
    }

    /// `(rl_sum(α), rl_diff(α))`, claimed unit nabla.
    pub fn rl(alpha: f64) -> Result<Self> {
        Self::new(
            Kernel::rl_sum(alpha)?,
            Kernel::rl_diff(alpha)?,
            ClassTarget::UnitNabla,
        )
    }

    /// The falling-factorial form of [`KernelPair::rl`].
    pub fn rl_falling(alpha: f64) -> Result<Self> {
        Self::new(
            Kernel::rl_sum_falling(alpha)?,
            Kernel::rl_diff_falling(alpha)?,
            ClassTarget::UnitNabla,
        )
    }
}

/// Compares the convolution of the pair against its class target on offsets `1..=n`.
pub fn check_class(pair: &KernelPair, x0: f64, n: usize, tol: f64) -> Result<VerifyReport> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    pair.class.validate()?;
    let q = pair.q.sample(x0, n)?;
    let conv = match pair.class {
        ClassTarget::UnitDelta => delta_convolution(&pair.p, &q)?,
        _ => nabla_convolution(&pair.p, &q)?,
    };
    let targets = pair.class.targets(n)?;
    let errors = (1..=n).map(|k| (conv.at(k) - targets[k]).abs()).collect();
    let mut params = pair.class.params();
    params["p"] = json!(pair.p.spec());
    params["q"] = json!(pair.q.spec());
    params["x0"] = json!(x0);
    Ok(VerifyReport::new(
        format!("class_{}", pair.class.name()),
        params,
        1,
        errors,
        tol,
        None,
        None,
    ))
}

/// Composition checks of the fundamental theorem for a unit-nabla pair, on offsets `1..=N`:
///
/// 1. `RL_q(S_p y) = y`
/// 2. `C_q(S_p y) = y`
/// 3. `S_p(RL_q y) = y`
/// 4. `S_p(C_q y) = y − y(0)`
///
/// The pair is certified first ([`CLASS_TOL`], same `N` and base); a pair
/// that is not in the class is an error. The tolerance is `tol · max|y|`.
pub fn verify_ftc(
    pair: &KernelPair,
    y: &GridFunction<f64>,
    tol: f64,
    seed: Option<u64>,
) -> Result<Vec<VerifyReport>> {
    let n = y.length();
    if pair.class != ClassTarget::UnitNabla {
        return Err(Error::InvalidParameter(
            "the FTC checks need a unit_nabla pair".into(),
        ));
    }
    let cert = check_class(pair, y.base(), n, CLASS_TOL)?;
    if !cert.passed() {
        return Err(Error::ClassPreconditionFailed {
            max_error: cert.max_abs_error,
            tolerance: cert.tolerance,
        });
    }
    let (p, q) = (&pair.p, &pair.q);
    let tolerance = tol * y.max_abs();

    let s = gen_sum(p, y, Mode::Nabla)?;
    let rl_s = gen_rl_diff(q, &s, Mode::Nabla)?;
    let c_s = gen_caputo_diff(q, &s, Mode::Nabla)?;
    let s_rl = gen_sum(
        p,
        &gen_rl_diff(q, y, Mode::Nabla)?.extended_back(0.0),
        Mode::Nabla,
    )?;
    let s_c = gen_sum(
        p,
        &gen_caputo_diff(q, y, Mode::Nabla)?.extended_back(0.0),
        Mode::Nabla,
    )?;

    let y0 = y.at(0);
    let errs = |f: &dyn Fn(usize) -> f64| (1..=n).map(f).collect::<Vec<_>>();
    let checks = [
        ("ftc_rl_of_sum", errs(&|k| (rl_s.at(k - 1) - y.at(k)).abs())),
        (
            "ftc_caputo_of_sum",
            errs(&|k| (c_s.at(k - 1) - y.at(k)).abs()),
        ),
        ("ftc_sum_of_rl", errs(&|k| (s_rl.at(k) - y.at(k)).abs())),
        (
            "ftc_sum_of_caputo",
            errs(&|k| (s_c.at(k) - (y.at(k) - y0)).abs()),
        ),
    ];
    Ok(checks
        .into_iter()
        .map(|(id, errors)| {
            let params = json!({ "p": p.spec(), "q": q.spec(), "x0": y.base(), "n": n, "max_abs_y": y.max_abs() });
            VerifyReport::new(id, params, 1, errors, tolerance, None, seed)
        })
        .collect())
}

/// The delta/nabla correspondences.
#[derive(Debug, Clone)]
pub enum DualCase {
    /// `(p ∗ q)^Δ_{x0+1}(x + 1) = (p ∗ q)^∇_{x0}(x)`, bit for bit.
    Convolution {
        p: Kernel<f64>,
        q: GridFunction<f64>,
    },
    /// `S^Δ_{p; x0+1} y (x + 1) = S^∇_{p; x0} y (x)`, bit for bit.
    GenSum {
        kernel: Kernel<f64>,
        y: GridFunction<f64>,
    },
    /// `RL^Δ_{q; x0+1} y (x) = RL^∇_{q; x0} y (x)`.
    GenRlDiff {
        kernel: Kernel<f64>,
        y: GridFunction<f64>,
    },
    /// `Δ^{−α}_{x0+1} y (x + α) = ∇^{−α}_{x0} y (x)`.
    ClassicalSum { alpha: f64, y: GridFunction<f64> },
    /// `RLΔ^α_{x0+1} y (x − α) = RL∇^α_{x0} y (x)`, for `x ≥ x0 + 2`.
    ClassicalRlDiff { alpha: f64, y: GridFunction<f64> },
}

fn bitwise_report(
    identity: &str,
    params: Value,
    pairs: Vec<(f64, f64)>,
    seed: Option<u64>,
) -> VerifyReport {
    let exact = pairs.iter().all(|(a, b)| a.to_bits() == b.to_bits());
    let errors = pairs.iter().map(|(a, b)| (a - b).abs()).collect();
    VerifyReport::new(identity, params, 1, errors, 0.0, Some(exact), seed)
}

/// Checks one delta/nabla correspondence.
///
/// In the delta forms the kernel stays a function on `N_{x0}` while the sum
/// starts at `x0 + 1`, so it is read through [`Kernel::advanced`]. The two
/// convolution forms demand bit-exact agreement; the others use `tol`.
pub fn verify_dual(case: &DualCase, tol: f64, seed: Option<u64>) -> Result<VerifyReport> {
    let y_of = |y: &GridFunction<f64>| -> Result<()> {
        if y.length() < 2 {
            Err(Error::InvalidGrid(
                "dual checks need at least three points".into(),
            ))
        } else {
            Ok(())
        }
    };
    match case {
        DualCase::Convolution { p, q } | DualCase::GenSum { kernel: p, y: q } => {
            y_of(q)?;
            let n = q.length();
            let shifted = q.rebased(1)?;
            let (nabla, delta, identity) = match case {
                DualCase::Convolution { .. } => (
                    nabla_convolution(p, q)?,
                    delta_convolution(&p.advanced(1), &shifted)?,
                    "dual_convolution",
                ),
                _ => (
                    gen_sum(p, q, Mode::Nabla)?,
                    gen_sum(&p.advanced(1), &shifted, Mode::Delta)?,
                    "dual_gen_sum",
                ),
            };
            let pairs = (1..=n).map(|k| (delta.at(k), nabla.at(k))).collect();
            let params = json!({ "kernel": p.spec(), "x0": q.base(), "n": n });
            Ok(bitwise_report(identity, params, pairs, seed))
        }
        DualCase::GenRlDiff { kernel, y } => {
            y_of(y)?;
            let n = y.length();
            let nabla = gen_rl_diff(kernel, y, Mode::Nabla)?;
            let delta = gen_rl_diff(&kernel.advanced(1), &y.rebased(1)?, Mode::Delta)?;
            // both are indexed from x0 + 1
            let errors = (1..=n)
                .map(|k| (delta.at(k - 1) - nabla.at(k - 1)).abs())
                .collect();
            let params = json!({ "kernel": kernel.spec(), "x0": y.base(), "n": n });
            Ok(VerifyReport::new(
                "dual_gen_rl_diff",
                params,
                1,
                errors,
                tol,
                None,
                seed,
            ))
        }
        DualCase::ClassicalSum { alpha, y } => {
            y_of(y)?;
            let n = y.length();
            let nabla = classical_frac_sum(*alpha, y, Mode::Nabla)?;
            let delta = classical_frac_sum(*alpha, &y.rebased(1)?, Mode::Delta)?;
            // delta base x0 + 1 + α: the point x + α is offset k − 1
            let errors = (1..=n)
                .map(|k| (delta.at(k - 1) - nabla.at(k)).abs())
                .collect();
            let params = json!({ "alpha": alpha, "x0": y.base(), "n": n });
            Ok(VerifyReport::new(
                "dual_classical_sum",
                params,
                1,
                errors,
                tol,
                None,
                seed,
            ))
        }
        DualCase::ClassicalRlDiff { alpha, y } => {
            y_of(y)?;
            let n = y.length();
            let nabla = classical_frac_diff(*alpha, y, Flavor::Rl, Mode::Nabla)?;
            let delta = classical_frac_diff(*alpha, &y.rebased(1)?, Flavor::Rl, Mode::Delta)?;
            // delta base x0 + 2 − α: the point x − α is offset k − 2
            let errors = (2..=n)
                .map(|k| (delta.at(k - 2) - nabla.at(k - 1)).abs())
                .collect();
            let params = json!({ "alpha": alpha, "x0": y.base(), "n": n });
            Ok(VerifyReport::new(
                "dual_classical_rl_diff",
                params,
                2,
                errors,
                tol,
                None,
                seed,
            ))
        }
    }
}

/// `∇_x Σ_{s=1..x} g(x, s) = g(x−1, x) + Σ_{s=1..x} ∇_x g(x, s)` on `x = 1..=N`,
/// both sides summed directly from the table.
pub fn verify_leibniz(g: &BivariateGridFunction<f64>, tol: f64) -> Result<VerifyReport> {
    let n = g.length();
    if n < 2 {
        return Err(Error::InvalidGrid(
            "the Leibniz check needs a table of length ≥ 2".into(),
        ));
    }
    let row_sum = |x: usize| (1..=x).fold(0.0, |acc, s| acc + g.at(x, s));
    let errors = (1..=n)
        .map(|x| {
            let lhs = row_sum(x) - row_sum(x - 1);
            let rhs = (1..=x).fold(g.at(x - 1, x), |acc, s| acc + (g.at(x, s) - g.at(x - 1, s)));
            (lhs - rhs).abs()
        })
        .collect();
    Ok(VerifyReport::new(
        "leibniz",
        json!({ "n": n }),
        1,
        errors,
        tol,
        None,
        None,
    ))
}

/// The Leibniz rule on `g(x, s) = q(x − s + 1) y(s)` (zero for `s > x + 1`).
pub fn verify_leibniz_kernel(
    q: &Kernel<f64>,
    y: &GridFunction<f64>,
    tol: f64,
    seed: Option<u64>,
) -> Result<VerifyReport> {
    let n = y.length();
    let table = q.table(n + 1)?;
    let g = BivariateGridFunction::from_fn(y.base(), n, |x, s| {
        if s <= x + 1 {
            table[x + 1 - s] * y.at(s)
        } else {
            0.0
        }
    })?;
    let mut report = verify_leibniz(&g, tol)?;
    report.identity = "leibniz_kernel_form".into();
    report.seed = seed;
    Ok(report.with_param("q", json!(q.spec())))
}

/// `RL_q y (k) − C_q y (k) = y(0) q(k)` on `k = 1..=N`.
pub fn verify_rl_caputo(
    q: &Kernel<f64>,
    y: &GridFunction<f64>,
    tol: f64,
    seed: Option<u64>,
) -> Result<VerifyReport> {
    let n = y.length();
    let rl = gen_rl_diff(q, y, Mode::Nabla)?;
    let c = gen_caputo_diff(q, y, Mode::Nabla)?;
    let errors = (1..=n)
        .map(|k| Ok((rl.at(k - 1) - c.at(k - 1) - y.at(0) * q.value(k)?).abs()))
        .collect::<Result<Vec<_>>>()?;
    let params = json!({ "q": q.spec(), "x0": y.base(), "n": n });
    Ok(VerifyReport::new(
        "rl_caputo_boundary",
        params,
        1,
        errors,
        tol,
        None,
        seed,
    ))
}

/// Power rule of the classical fractional sums; errors are relative.
///
/// Nabla: `∇^{−α} [t^(μ, rising)/Γ(μ+1)] = t^(α+μ, rising)/Γ(μ+α+1)` with
/// `t = x − x0`, on offsets `1..=N`. Delta: `Δ^{−α}_{x0+μ} [t^(μ)/Γ(μ+1)] =
/// t^(α+μ)/Γ(μ+α+1)` on `N_{x0+μ+α}`, offsets `0..=N`.
pub fn verify_power_rule(
    alpha: f64,
    mu: f64,
    mode: Mode,
    n: usize,
    tol: f64,
) -> Result<VerifyReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::order("power rule (requires α > 0)", alpha));
    }
    if !(mu > -1.0 && mu.is_finite()) {
        return Err(Error::order("power rule (requires μ > −1)", mu));
    }
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    let rel =
        |got: f64, expected: f64| (got - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
    let g_mu = gamma(mu + 1.0);
    let g_out = gamma(mu + alpha + 1.0);
    let (first, errors) = match mode {
        Mode::Nabla => {
            let y = GridFunction::new(
                0.0,
                (0..=n)
                    .map(|k| Ok(rising_factorial(k as f64, mu)? / g_mu))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let s = classical_frac_sum(alpha, &y, Mode::Nabla)?;
            let errors = (1..=n)
                .map(|k| {
                    Ok(rel(
                        s.at(k),
                        rising_factorial(k as f64, alpha + mu)? / g_out,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            (1, errors)
        }
        Mode::Delta => {
            let y = GridFunction::new(
                mu,
                (0..=n)
                    .map(|j| Ok(falling_factorial(mu + j as f64, mu)? / g_mu))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let s = classical_frac_sum(alpha, &y, Mode::Delta)?;
            let errors = (0..=n)
                .map(|k| {
                    Ok(rel(
                        s.at(k),
                        falling_factorial(mu + alpha + k as f64, alpha + mu)? / g_out,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            (0, errors)
        }
    };
    let params =
        json!({ "alpha": alpha, "mu": mu, "mode": mode.to_string(), "n": n, "error": "relative" });
    Ok(VerifyReport::new(
        format!("power_rule_{mode}"),
        params,
        first,
        errors,
        tol,
        None,
        None,
    ))
}

/// `∇^{−ν} E_{α,β}(λ, ·) = E_{α,β+ν}(λ, ·)` on offsets `1..=N`.
///
/// Errors are scaled by `max(1, |E_{α,β+ν}|)`, since the values grow
/// geometrically when `λ > 0`.
pub fn verify_ml_shift(
    params: &MlParams<f64>,
    nu: f64,
    n: usize,
    tol: f64,
) -> Result<VerifyReport> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::order("ML shift (requires ν > 0)", nu));
    }
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    let e = GridFunction::new(0.0, ml_values(params, n)?)?;
    let lhs = classical_frac_sum(nu, &e, Mode::Nabla)?;
    let rhs = ml_values(&params.with_beta(params.beta() + nu)?, n)?;
    let errors = (1..=n)
        .map(|k| (lhs.at(k) - rhs[k]).abs() / rhs[k].abs().max(1.0))
        .collect();
    let p = json!({
        "alpha": params.alpha(),
        "beta": params.beta(),
        "lambda": params.lambda(),
        "nu": nu,
        "n": n,
        "error": "scaled by max(1, |rhs|)",
    });
    Ok(VerifyReport::new("ml_shift", p, 1, errors, tol, None, None))
}

/// Named groups of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Class,
    Dual,
    Ftc,
    PowerRule,
    RlCaputo,
    MlShift,
    Leibniz,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = [
        "all",
        "class",
        "dual",
        "ftc",
        "power-rule",
        "rl-caputo",
        "ml-shift",
        "leibniz",
    ];

    fn groups(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Class,
                Suite::Dual,
                Suite::Ftc,
                Suite::PowerRule,
                Suite::RlCaputo,
                Suite::MlShift,
                Suite::Leibniz,
            ],
            other => vec![other],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "class" => Suite::Class,
            "dual" => Suite::Dual,
            "ftc" => Suite::Ftc,
            "power-rule" => Suite::PowerRule,
            "rl-caputo" => Suite::RlCaputo,
            "ml-shift" => Suite::MlShift,
            "leibniz" => Suite::Leibniz,
            other => {
                return Err(Error::Parse(format!(
                    "unknown suite `{other}` (expected one of {})",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

/// Settings shared by the checks of a suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Grid length `N`.
    pub n: usize,
    pub seed: u64,
    /// Replaces every check's default tolerance.
    pub tol: Option<f64>,
    /// Order used by the dual, FTC and class checks (default 0.5).
    pub alpha: Option<f64>,
    /// Base point of the random inputs.
    pub x0: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: 60,
            seed: 7,
            tol: None,
            alpha: None,
            x0: 0.0,
        }
    }
}

type Group<'a> = Box<dyn FnOnce() -> Result<Vec<VerifyReport>> + Send + 'a>;

/// Runs a suite; groups run on separate threads, reports come back in a fixed order.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<VerifyReport>> {
    if cfg.n < 2 {
        return Err(Error::InvalidParameter(format!(
            "suite runs need n ≥ 2, got {}",
            cfg.n
        )));
    }
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
    }
    let groups: Vec<Group> = suite
        .groups()
        .into_iter()
        .map(|g| -> Group { Box::new(move || run_group(g, cfg)) })
        .collect();
    let results: Vec<Result<Vec<VerifyReport>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = groups.into_iter().map(|g| scope.spawn(g)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
            .collect()
    });
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }
    Ok(reports)
}

fn run_group(group: Suite, cfg: &SuiteConfig) -> Result<Vec<VerifyReport>> {
    let n = cfg.n;
    let alpha = cfg.alpha.unwrap_or(0.5);
    let tol = |default: f64| cfg.tol.unwrap_or(default);
    let seed = |k: u64| cfg.seed.wrapping_add(k);
    let y = |k: u64, len: usize| random_grid_function(seed(k), cfg.x0, len);
    let mut out = Vec::new();
    match group {
        Suite::All => unreachable!("expanded by Suite::groups"),
        Suite::Class => {
            let ab = 0.25;
            let lambda = ab_lambda(ab);
            let pairs = [
                KernelPair::rl(alpha)?,
                KernelPair::rl_falling(alpha)?,
                KernelPair::new(
                    Kernel::constant(),
                    Kernel::exponential(0.5)?,
                    ClassTarget::Cf { alpha: 0.5 },
                )?,
                KernelPair::new(
                    Kernel::rl_sum(ab)?,
                    Kernel::mittag_leffler(MlParams::new(ab, 1.0, lambda)?),
                    ClassTarget::Ab { alpha: ab, lambda },
                )?,
            ];
            for (i, pair) in pairs.iter().enumerate() {
                let default = if i == 3 { ML_TOL } else { DEFAULT_TOL };
                out.push(check_class(pair, cfg.x0, n, tol(default))?);
            }
        }
        Suite::Dual => {
            let pair = KernelPair::rl(alpha)?;
            let cases = [
                (
                    DualCase::Convolution {
                        p: pair.p.clone(),
                        q: pair.q.sample(cfg.x0, n)?,
                    },
                    None,
                ),
                (
                    DualCase::GenSum {
                        kernel: pair.p.clone(),
                        y: y(1, n),
                    },
                    Some(seed(1)),
                ),
                (
                    DualCase::GenRlDiff {
                        kernel: pair.q.clone(),
                        y: y(2, n),
                    },
                    Some(seed(2)),
                ),
                (DualCase::ClassicalSum { alpha, y: y(3, n) }, Some(seed(3))),
                (
                    DualCase::ClassicalRlDiff {
                        alpha,
                        y: y(4, n + 1),
                    },
                    Some(seed(4)),
                ),
            ];
            for (case, s) in &cases {
                out.push(verify_dual(case, tol(DEFAULT_TOL), *s)?);
            }
        }
        Suite::Ftc => {
            for (k, pair) in [KernelPair::rl(alpha)?, KernelPair::rl_falling(alpha)?]
                .iter()
                .enumerate()
            {
                let s = 10 + k as u64;
                out.extend(verify_ftc(pair, &y(s, n), tol(FTC_TOL), Some(seed(s)))?);
            }
        }
        Suite::PowerRule => {
            for mode in [Mode::Nabla, Mode::Delta] {
                for a in [0.3, 0.8, 1.5] {
                    for mu in [0.0, 0.5, 1.0, 2.3] {
                        out.push(verify_power_rule(a, mu, mode, n, tol(POWER_RULE_TOL))?);
                    }
                }
            }
        }
        Suite::RlCaputo => {
            let kernels = [
                Kernel::rl_diff(0.5)?,
                Kernel::exponential(0.4)?,
                Kernel::mittag_leffler(MlParams::new(0.3, 1.0, -3.0 / 7.0)?),
            ];
            for (k, q) in kernels.iter().enumerate() {
                let s = 20 + k as u64;
                out.push(verify_rl_caputo(
                    q,
                    &y(s, n),
                    tol(DEFAULT_TOL),
                    Some(seed(s)),
                )?);
            }
        }
        Suite::MlShift => {
            let cases = [
                (MlParams::new(0.3, 1.5, 0.0)?, 0.4),
                (MlParams::new(0.3, 1.0, -3.0 / 7.0)?, 0.3),
                (MlParams::new(1.0, 1.0, 0.5)?, 1.0),
            ];
            for (params, nu) in &cases {
                out.push(verify_ml_shift(
                    params,
                    *nu,
                    n.min(ML_SHIFT_MAX_N),
                    tol(ML_TOL),
                )?);
            }
        }
        Suite::Leibniz => {
            let ones = BivariateGridFunction::from_fn(cfg.x0, n, |_, _| 1.0)?;
            out.push(verify_leibniz(&ones, tol(1e-12))?.with_param("table", json!("ones")));
            out.push(verify_leibniz_kernel(
                &Kernel::rl_diff(0.5)?,
                &y(30, n),
                tol(1e-12),
                Some(seed(30)),
            )?);
            let mut rng = ChaCha8Rng::seed_from_u64(seed(31));
            let table =
                BivariateGridFunction::from_fn(cfg.x0, n, |_, _| rng.gen_range(-1.0..=1.0))?;
            let mut r = verify_leibniz(&table, tol(1e-12))?.with_param("table", json!("random"));
            r.seed = Some(seed(31));
            out.push(r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_verdicts() {
        let r = VerifyReport::new("x", json!({}), 1, vec![0.0, 1e-12], 1e-10, None, None);
        assert!(r.passed());
        assert_eq!(r.range, [1, 2]);
        let r = VerifyReport::new("x", json!({}), 1, vec![0.0, f64::NAN], 1e-10, None, None);
        assert!(!r.passed());
        let r = VerifyReport::new("x", json!({}), 1, vec![0.0], 0.0, Some(false), None);
        assert!(!r.passed());
    }

    #[test]
    fn report_json_schema() {
        let r = VerifyReport::new(
            "dual_convolution",
            json!({ "n": 3 }),
            1,
            vec![0.0; 3],
            0.0,
            Some(true),
            Some(4),
        );
        let v: Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "bit_exact",
                "identity",
                "max_abs_error",
                "params",
                "range",
                "seed",
                "tolerance",
                "verdict"
            ]
        );
        assert_eq!(v["verdict"], "pass");
        assert_eq!(v["range"], json!([1, 3]));
        let back: VerifyReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.identity, "dual_convolution");
    }

    #[test]
    fn class_examples() {
        let r = check_class(&KernelPair::rl(0.5).unwrap(), 0.0, 100, 1e-10).unwrap();
        assert!(r.passed() && r.max_abs_error <= 1e-12, "{r}");
        assert!(
            check_class(&KernelPair::rl_falling(0.5).unwrap(), 0.0, 100, 1e-10)
                .unwrap()
                .passed()
        );

        let pair = KernelPair::new(
            Kernel::constant(),
            Kernel::constant(),
            ClassTarget::UnitNabla,
        )
        .unwrap();
        let r = check_class(&pair, 0.0, 2, 1e-10).unwrap();
        assert!(!r.passed());
        assert_eq!(r.per_point_error, vec![0.0, 1.0]);

        let pair = KernelPair::new(
            Kernel::constant(),
            Kernel::exponential(0.5).unwrap(),
            ClassTarget::Cf { alpha: 0.5 },
        )
        .unwrap();
        let r = check_class(&pair, 0.0, 1000, 1e-12).unwrap();
        assert!(r.passed(), "{r}");

        let lambda = -1.0 / 3.0;
        let pair = KernelPair::new(
            Kernel::rl_sum(0.25).unwrap(),
            Kernel::mittag_leffler(MlParams::new(0.25, 1.0, lambda).unwrap()),
            ClassTarget::Ab {
                alpha: 0.25,
                lambda,
            },
        )
        .unwrap();
        assert!(check_class(&pair, 0.0, 50, 1e-8).unwrap().passed());

        assert!(KernelPair::new(
            Kernel::constant(),
            Kernel::constant(),
            ClassTarget::Cf { alpha: 1.5 }
        )
        .is_err());
        assert!(check_class(&KernelPair::rl(0.5).unwrap(), 0.0, 0, 1e-10).is_err());
    }

    #[test]
    fn ftc_requires_a_certified_pair() {
        let y = random_grid_function(1, 0.0, 20);
        let bad = KernelPair::new(
            Kernel::constant(),
            Kernel::constant(),
            ClassTarget::UnitNabla,
        )
        .unwrap();
        assert!(matches!(
            verify_ftc(&bad, &y, FTC_TOL, None),
            Err(Error::ClassPreconditionFailed { .. })
        ));

        let reports = verify_ftc(&KernelPair::rl(0.5).unwrap(), &y, FTC_TOL, Some(1)).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.passed()), "{:?}", worst(&reports));

        let flat = GridFunction::constant(0.0, 10, 0.7).unwrap();
        let reports = verify_ftc(&KernelPair::rl(0.3).unwrap(), &flat, FTC_TOL, None).unwrap();
        assert!(reports[3].per_point_error.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn dual_examples() {
        let pair = KernelPair::rl(0.5).unwrap();
        let r = verify_dual(
            &DualCase::Convolution {
                p: pair.p.clone(),
                q: pair.q.sample(0.0, 80).unwrap(),
            },
            0.0,
            None,
        )
        .unwrap();
        assert_eq!(r.bit_exact, Some(true));
        assert!(r.passed());
        let y = random_grid_function(3, 0.0, 40);
        let r = verify_dual(
            &DualCase::ClassicalSum {
                alpha: 0.5,
                y: y.clone(),
            },
            DEFAULT_TOL,
            Some(3),
        )
        .unwrap();
        assert!(r.passed(), "{r}");
        let r = verify_dual(
            &DualCase::ClassicalRlDiff { alpha: 0.5, y },
            DEFAULT_TOL,
            Some(3),
        )
        .unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.range, [2, 40]);
    }

    #[test]
    fn leibniz_examples() {
        let ones = BivariateGridFunction::from_fn(0.0, 5, |_, _| 1.0).unwrap();
        let r = verify_leibniz(&ones, 1e-12).unwrap();
        assert!(r.passed() && r.max_abs_error == 0.0);
    }

    #[test]
    fn power_rule_examples() {
        let r = verify_power_rule(1.0, 0.0, Mode::Nabla, 30, 1e-12).unwrap();
        assert!(r.passed() && r.max_abs_error <= 1e-14, "{r}");
        let r = verify_power_rule(0.3, 2.3, Mode::Delta, 60, POWER_RULE_TOL).unwrap();
        assert!(r.passed(), "{r}");
        assert!(verify_power_rule(0.3, -1.0, Mode::Nabla, 10, 1e-9).is_err());
        assert!(verify_power_rule(0.0, 0.5, Mode::Nabla, 10, 1e-9).is_err());
    }

    #[test]
    fn ml_shift_examples() {
        let r = verify_ml_shift(&MlParams::new(1.0, 1.0, 0.5).unwrap(), 1.0, 40, ML_TOL).unwrap();
        assert!(r.passed(), "{r}");
        let r = verify_ml_shift(
            &MlParams::new(0.3, 1.0, -3.0 / 7.0).unwrap(),
            0.3,
            40,
            ML_TOL,
        )
        .unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn suites_are_deterministic() {
        let cfg = SuiteConfig {
            n: 30,
            ..SuiteConfig::default()
        };
        let a = run_suite(Suite::All, &cfg).unwrap();
        let b = run_suite(Suite::All, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(
            a.iter().all(|r| r.passed()),
            "{:?}",
            worst(&a).map(|r| r.to_string())
        );
        assert!("nope".parse::<Suite>().is_err());
    }
}
