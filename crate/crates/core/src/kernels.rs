//! Convolution kernels: named, parameterized rules from a non-negative integer
//! offset to a real value, plus the discrete Mittag-Leffler function.
//!
//! A kernel `p` on `N_{x0}` always enters the operators as `p(x − ρ(s) + x0)`,
//! which depends on the offset `m = x − s + 1` alone, so kernels are stored
//! as pure functions of the offset. Values are memoized per kernel; the memo
//! is shared between clones and safe to read from several threads.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::numerics::{
    falling_factorial, gamma, log_abs_gamma, log_gamma_ratio, pole_index, rising_factorial,
    LogGamma,
};
use crate::scalar::Real;

/// Relative size below which the next series term stops [`ml_series`].
pub const ML_SERIES_TOLERANCE: f64 = 1e-16;
/// Largest term index [`ml_series`] will evaluate.
pub const ML_SERIES_MAX_TERMS: usize = 500;

/// Named real parameters of a kernel, e.g. `alpha`, `beta`, `lambda`.
pub type KernelParams = BTreeMap<String, f64>;

/// Parameters of the discrete Mittag-Leffler function `E_{α,β}(λ, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams<T> {
    alpha: T,
    beta: T,
    lambda: T,
}

impl<T: Real> MlParams<T> {
    /// Requires `α > 0`, `β > 0` and `|λ| < 1`.
    pub fn new(alpha: T, beta: T, lambda: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(Error::order(
                "Mittag-Leffler order alpha (must be > 0)",
                alpha.to_f64_lossy(),
            ));
        }
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Mittag-Leffler type beta must be > 0, got {beta}"
            )));
        }
        if !(lambda.abs() < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "Mittag-Leffler rate lambda must satisfy |lambda| < 1, got {lambda}"
            )));
        }
        Ok(MlParams {
            alpha,
            beta,
            lambda,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// The same function with `β` replaced by `β + shift`.
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        Self::new(self.alpha, beta, self.lambda)
    }
}

/// `E_{α,β}(λ, t) = Σ_k λ^k t^(kα+β−1, rising) / Γ(kα+β)` at a single `t`.
///
/// See [`ml_values`] for how the sum is evaluated.
pub fn ml_eval<T: Real>(params: &MlParams<T>, t: usize) -> Result<T> {
    Ok(ml_values(params, t)?[t])
}

/// `E_{α,β}(λ, t)` for `t = 0..=t_max`.
///
/// At `t = 0` every term carries the factor `1/Γ(0)` and vanishes, except
/// when `kα + β − 1 = 0` for some integer `k ≥ 0`, where the term is `λ^k`.
///
/// For `t ≥ 1` the values are the power-series coefficients
/// `E(λ, t) = [z^(t−1)] (1−z)^(α−β) / ((1−z)^α − λ)`, since
/// `Σ_{t≥1} t^(μ, rising)/Γ(μ+1) z^(t−1) = (1−z)^(−μ−1)`. The coefficients
/// obey the recurrence
/// `(1−λ) g_n = c_n − Σ_{i=1..n} a_i g_(n−i)` with `a`, `c` the binomial
/// coefficients of `(1−z)^α` and `(1−z)^(α−β)`. For `0 < α < 1` every
/// `−a_i` is positive, so the recurrence does not cancel even where the
/// direct series has terms many orders of magnitude larger than its sum.
pub fn ml_values<T: Real>(params: &MlParams<T>, t_max: usize) -> Result<Vec<T>> {
    let MlParams {
        alpha,
        beta,
        lambda,
    } = *params;
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(ml_at_zero(params));
    if t_max == 0 {
        return Ok(out);
    }

    let n_max = t_max - 1;
    let gamma_exp = alpha - beta;
    let mut a = Vec::with_capacity(n_max + 1);
    let mut c = Vec::with_capacity(n_max + 1);
    a.push(T::one());
    c.push(T::one());
    for n in 1..=n_max {
        let nf = T::from_usize_lossy(n);
        let prev = nf - T::one();
        a.push(a[n - 1] * (prev - alpha) / nf);
        c.push(c[n - 1] * (prev - gamma_exp) / nf);
    }

    let denom = T::one() - lambda;
    let mut g: Vec<T> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = c[n];
        for i in 1..=n {
            acc = acc - a[i] * g[n - i];
        }
        g.push(acc / denom);
    }
    if let Some(t) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "Mittag-Leffler value at t = {}",
            t + 1
        )));
    }
    out.extend(g);
    Ok(out)
}

fn ml_at_zero<T: Real>(params: &MlParams<T>) -> T {
    // kα + β − 1 = 0  ⇔  k = (1 − β)/α
    let k = (T::one() - params.beta) / params.alpha;
    match pole_index(-k) {
        Some(k) => params.lambda.powi(k as i32),
        None => T::zero(),
    }
}

/// The truncated series `Σ_k λ^k t^(kα+β−1, rising) / Γ(kα+β)`, summed
/// term by term.
///
/// Stops before the first term `k ≥ 1` whose magnitude is below
/// `1e-16 · max(1, |partial sum|)`; fails with [`Error::NoConvergence`] if
/// term [`ML_SERIES_MAX_TERMS`] is reached first. The series is badly
/// conditioned once `t` is large and `|λ|` is close to 1 (terms far larger
/// than the sum), so [`ml_eval`] does not use it.
pub fn ml_series<T: Real>(params: &MlParams<T>, t: usize) -> Result<T> {
    let MlParams {
        alpha,
        beta,
        lambda,
    } = *params;
    let tf = T::from_usize_lossy(t);
    let tol = T::lit(ML_SERIES_TOLERANCE);
    let ln_lambda = lambda.abs().ln();
    let mut sum = T::zero();
    for k in 0..=ML_SERIES_MAX_TERMS {
        let kf = T::from_usize_lossy(k);
        let order = kf * alpha + beta;
        let term = if k > 0 && lambda == T::zero() {
            T::zero()
        } else {
            let rising = log_gamma_ratio(tf, order - T::one())?;
            if rising.sign == 0 {
                T::zero()
            } else {
                let ln_gamma = match log_abs_gamma(order) {
                    LogGamma::Finite { ln_abs, .. } => ln_abs,
                    LogGamma::Pole => unreachable!("order is positive"),
                };
                let ln_pow = if k == 0 { T::zero() } else { kf * ln_lambda };
                let mut sign = rising.sign;
                if lambda < T::zero() && k % 2 == 1 {
                    sign = -sign;
                }
                let mag = (ln_pow + rising.ln_abs - ln_gamma).exp();
                if sign < 0 {
                    -mag
                } else {
                    mag
                }
            }
        };
        if k > 0 && term.abs() < tol * sum.abs().max(T::one()) {
            return Ok(sum);
        }
        if k == ML_SERIES_MAX_TERMS {
            break;
        }
        sum = sum + term;
    }
    Err(Error::NoConvergence {
        t,
        terms: ML_SERIES_MAX_TERMS,
    })
}

enum Rule<T> {
    RlSum { alpha: T, gamma: T },
    RlDiff { alpha: T, gamma: T },
    RlSumFalling { alpha: T, gamma: T },
    RlDiffFalling { alpha: T, gamma: T },
    MittagLeffler(MlParams<T>),
    Exponential { base: T },
    Constant,
    Tabulated(Vec<T>),
    Advanced { inner: Kernel<T>, by: usize },
}

struct KernelInner<T> {
    name: String,
    params: Vec<(String, f64)>,
    rule: Rule<T>,
    memo: RwLock<Arc<Vec<T>>>,
}

/// A kernel `m ↦ p(m)` on offsets `m ≥ 0`. Cheap to clone.
#[derive(Clone)]
pub struct Kernel<T> {
    inner: Arc<KernelInner<T>>,
}

impl<T> Kernel<T> {
    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.inner.params
    }

    /// `name(key=value,…)`, or just the name when there are no parameters.
    pub fn spec(&self) -> String {
        if self.inner.params.is_empty() {
            return self.inner.name.clone();
        }
        let args: Vec<String> = self
            .inner
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}({})", self.inner.name, args.join(","))
    }
}

impl<T> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("spec", &self.spec())
            .finish()
    }
}

impl<T> fmt::Display for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

fn check_alpha<T: Real>(kernel: &str, alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::order(
            format!("{kernel} (order must be > 0)"),
            alpha.to_f64_lossy(),
        ))
    }
}

impl<T: Real> Kernel<T> {
    fn build(name: &str, params: Vec<(&str, T)>, rule: Rule<T>) -> Self {
        Kernel {
            inner: Arc::new(KernelInner {
                name: name.to_string(),
                params: params
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v.to_f64_lossy()))
                    .collect(),
                rule,
                memo: RwLock::new(Arc::new(Vec::new())),
            }),
        }
    }

    /// `m^(α−1, rising) / Γ(α)`: the nabla Riemann-Liouville sum kernel.
    pub fn rl_sum(alpha: T) -> Result<Self> {
        check_alpha("rl_sum", alpha)?;
        let rule = Rule::RlSum {
            alpha,
            gamma: gamma(alpha),
        };
        Ok(Self::build("rl_sum", vec![("alpha", alpha)], rule))
    }

    /// `m^(−α, rising) / Γ(1−α)`: the nabla Riemann-Liouville difference kernel.
    pub fn rl_diff(alpha: T) -> Result<Self> {
        let gamma = Self::diff_gamma("rl_diff", alpha)?;
        Ok(Self::build(
            "rl_diff",
            vec![("alpha", alpha)],
            Rule::RlDiff { alpha, gamma },
        ))
    }

    /// `(m+α−2)^(α−1, falling) / Γ(α)`; equal to [`Kernel::rl_sum`] offset by offset.
    pub fn rl_sum_falling(alpha: T) -> Result<Self> {
        check_alpha("rl_sum_falling", alpha)?;
        let rule = Rule::RlSumFalling {
            alpha,
            gamma: gamma(alpha),
        };
        Ok(Self::build("rl_sum_falling", vec![("alpha", alpha)], rule))
    }

    /// `(m−α−1)^(−α, falling) / Γ(1−α)`; equal to [`Kernel::rl_diff`] offset by offset.
    pub fn rl_diff_falling(alpha: T) -> Result<Self> {
        let gamma = Self::diff_gamma("rl_diff_falling", alpha)?;
        let rule = Rule::RlDiffFalling { alpha, gamma };
        Ok(Self::build("rl_diff_falling", vec![("alpha", alpha)], rule))
    }

    fn diff_gamma(kernel: &str, alpha: T) -> Result<T> {
        check_alpha(kernel, alpha)?;
        if pole_index(T::one() - alpha).is_some() {
            return Err(Error::order(
                format!("{kernel} (Γ(1−α) has a pole at integer α)"),
                alpha.to_f64_lossy(),
            ));
        }
        Ok(gamma(T::one() - alpha))
    }

    /// `m ↦ E_{α,β}(λ, m)`.
    pub fn mittag_leffler(params: MlParams<T>) -> Self {
        let named = vec![
            ("alpha", params.alpha),
            ("beta", params.beta),
            ("lambda", params.lambda),
        ];
        Self::build("mittag_leffler", named, Rule::MittagLeffler(params))
    }

    /// `(1−α)^m`, for `α ∈ (0, 1)`.
    pub fn exponential(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::order(
                "exponential (requires 0 < α < 1)",
                alpha.to_f64_lossy(),
            ));
        }
        let rule = Rule::Exponential {
            base: T::one() - alpha,
        };
        Ok(Self::build("exponential", vec![("alpha", alpha)], rule))
    }

    /// The constant kernel `1`.
    pub fn constant() -> Self {
        Self::build("constant", Vec::new(), Rule::Constant)
    }

    /// A kernel given by a finite table of values at offsets `0..values.len()`.
    pub fn tabulated(name: &str, values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tabulated kernel `{name}` has non-finite values"
            )));
        }
        Ok(Self::build(name, Vec::new(), Rule::Tabulated(values)))
    }

    /// `m ↦ self(m + by)`: the same function on `N_{x0}` read from the base `x0 + by`.
    pub fn advanced(&self, by: usize) -> Self {
        if by == 0 {
            return self.clone();
        }
        let rule = Rule::Advanced {
            inner: self.clone(),
            by,
        };
        Kernel {
            inner: Arc::new(KernelInner {
                name: format!("{}>>{by}", self.inner.name),
                params: self.inner.params.clone(),
                rule,
                memo: RwLock::new(Arc::new(Vec::new())),
            }),
        }
    }

    /// Kernel value at `offset`.
    pub fn value(&self, offset: usize) -> Result<T> {
        Ok(self.table(offset)?[offset])
    }

    /// Values at offsets `0..=max_offset` (the returned table may be longer).
    pub fn table(&self, max_offset: usize) -> Result<Arc<Vec<T>>> {
        {
            let memo = self.inner.memo.read().unwrap_or_else(|e| e.into_inner());
            if memo.len() > max_offset {
                return Ok(Arc::clone(&memo));
            }
        }
        let current = Arc::clone(&self.inner.memo.read().unwrap_or_else(|e| e.into_inner()));
        let target = max_offset.max(2 * current.len());
        let extended = Arc::new(self.extend(&current, target, max_offset)?);

        let mut memo = self.inner.memo.write().unwrap_or_else(|e| e.into_inner());
        if memo.len() < extended.len() {
            *memo = Arc::clone(&extended);
        }
        Ok(Arc::clone(&memo))
    }

    /// The values at offsets `0..=length`, as a grid function on `base`.
    pub fn sample(&self, base: T, length: usize) -> Result<GridFunction<T>> {
        let table = self.table(length)?;
        GridFunction::new(base, table[..=length].to_vec())
    }

    fn extend(&self, current: &[T], target: usize, required: usize) -> Result<Vec<T>> {
        match &self.inner.rule {
            Rule::MittagLeffler(params) => ml_values(params, target),
            Rule::Tabulated(values) => {
                if values.len() <= required {
                    return Err(Error::KernelOutOfRange {
                        kernel: self.inner.name.clone(),
                        offset: required,
                    });
                }
                Ok(values.clone())
            }
            Rule::Advanced { inner, by } => {
                let table = inner.table(required + by)?;
                let end = (target + by + 1).min(table.len());
                Ok(table[*by..end].to_vec())
            }
            _ => {
                let mut out = current.to_vec();
                out.reserve(target + 1 - current.len());
                for m in current.len()..=target {
                    out.push(self.pointwise(m)?);
                }
                Ok(out)
            }
        }
    }

    fn pointwise(&self, m: usize) -> Result<T> {
        let mf = T::from_usize_lossy(m);
        let one = T::one();
        match &self.inner.rule {
            Rule::RlSum { alpha, gamma } => Ok(rising_factorial(mf, *alpha - one)? / *gamma),
            Rule::RlDiff { alpha, gamma } => Ok(rising_factorial(mf, -*alpha)? / *gamma),
            Rule::RlSumFalling { alpha, gamma } => {
                let two = one + one;
                Ok(falling_factorial(mf + *alpha - two, *alpha - one)? / *gamma)
            }
            Rule::RlDiffFalling { alpha, gamma } => {
                Ok(falling_factorial(mf - *alpha - one, -*alpha)? / *gamma)
            }
            Rule::Exponential { base } => Ok(base.powi(m as i32)),
            Rule::Constant => Ok(one),
            Rule::MittagLeffler(_) | Rule::Tabulated(_) | Rule::Advanced { .. } => {
                unreachable!("table-valued rules are extended in bulk")
            }
        }
    }
}

/// Builds one of the named kernels from a parameter map.
///
/// Names: `rl_sum`, `rl_diff`, `rl_sum_falling`, `rl_diff_falling` (need
/// `alpha`), `mittag_leffler` (`alpha`, `beta`, `lambda`), `exponential`
/// (`alpha`) and `constant`.
pub fn builtin_kernel<T: Real>(name: &str, params: &KernelParams) -> Result<Kernel<T>> {
    let get = |key: &str| -> Result<T> {
        params.get(key).map(|&v| T::lit(v)).ok_or_else(|| {
            Error::InvalidParameter(format!("kernel `{name}` needs parameter `{key}`"))
        })
    };
    let allow = |keys: &[&str]| -> Result<()> {
        match params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParameter(format!(
                "kernel `{name}` does not take parameter `{k}`"
            ))),
            None => Ok(()),
        }
    };
    match name {
        "rl_sum" | "rl_diff" | "rl_sum_falling" | "rl_diff_falling" | "exponential" => {
            allow(&["alpha"])?;
            let alpha = get("alpha")?;
            match name {
                "rl_sum" => Kernel::rl_sum(alpha),
                "rl_diff" => Kernel::rl_diff(alpha),
                "rl_sum_falling" => Kernel::rl_sum_falling(alpha),
                "rl_diff_falling" => Kernel::rl_diff_falling(alpha),
                _ => Kernel::exponential(alpha),
            }
        }
        "mittag_leffler" => {
            allow(&["alpha", "beta", "lambda"])?;
            let params = MlParams::new(get("alpha")?, get("beta")?, get("lambda")?)?;
            Ok(Kernel::mittag_leffler(params))
        }
        "constant" => {
            allow(&[])?;
            Ok(Kernel::constant())
        }
        other => Err(Error::UnknownKernel(other.to_string())),
    }
}

/// Splits `name(key=value,…)` (or a bare `name`) into its parts.
pub fn parse_kernel_spec(spec: &str) -> Result<(String, KernelParams)> {
    let spec = spec.trim();
    let (name, rest) = match spec.find('(') {
        Some(open) => {
            if !spec.ends_with(')') {
                return Err(Error::Parse(format!("kernel spec `{spec}` is missing `)`")));
            }
            (&spec[..open], &spec[open + 1..spec.len() - 1])
        }
        None => (spec, ""),
    };
    let name = name.trim();
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(Error::Parse(format!("invalid kernel name in `{spec}`")));
    }
    let mut params = KernelParams::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{}` is not a number", value.trim())))?;
        if params.insert(key.trim().to_string(), value).is_some() {
            return Err(Error::Parse(format!(
                "parameter `{}` given twice",
                key.trim()
            )));
        }
    }
    Ok((name.to_string(), params))
}

/// Parses and builds a kernel from its spec string.
pub fn kernel_from_spec<T: Real>(spec: &str) -> Result<Kernel<T>> {
    let (name, params) = parse_kernel_spec(spec)?;
    builtin_kernel(&name, &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn ml_eval_examples() {
        let p = MlParams::new(0.3, 1.0, 0.4).unwrap();
        assert_eq!(ml_eval(&p, 0).unwrap(), 1.0);
        let p = MlParams::new(0.3, 2.0, 0.0).unwrap();
        assert_relative_eq!(ml_eval(&p, 5).unwrap(), 5.0, max_relative = 1e-14);
        let p = MlParams::new(1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(ml_eval(&p, 2).unwrap(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn ml_values_match_high_precision_reference() {
        // 150-digit mpmath sums of the defining series
        let lam_ab = -0.45 / 0.55;
        let cases: [((f64, f64, f64), [(usize, f64); 4]); 5] = [
            (
                (0.3, 1.0, 0.4),
                [
                    (1, 1.666_666_666_666_666_666_7),
                    (3, 2.283_333_333_333_333_333_3),
                    (10, 4.162_987_381_556_905_864_2),
                    (40, 22.159_031_804_536_849_994),
                ],
            ),
            (
                (0.45, 1.0, lam_ab),
                [
                    (1, 0.55),
                    (3, 0.380_431_562_5),
                    (10, 0.241_252_447_196_532_025_96),
                    (40, 0.136_537_106_509_641_952_12),
                ],
            ),
            (
                (0.25, 1.25, -1.0 / 3.0),
                [
                    (1, 0.75),
                    (3, 0.969_726_562_5),
                    (10, 1.201_385_400_043_363_915_8),
                    (40, 1.470_480_413_683_505_547_5),
                ],
            ),
            (
                (0.4, 1.4, -2.0 / 3.0),
                [
                    (1, 0.6),
                    (3, 0.821_76),
                    (10, 1.022_321_751_947_634_278_4),
                    (40, 1.196_732_306_777_207_127_5),
                ],
            ),
            (
                (1.7, 0.6, 0.9),
                [
                    (1, 10.0),
                    (3, 2644.05),
                    (10, 934_072_856_591.447_130_71),
                    (40, 4.028_739_413_345_845_323_5e48),
                ],
            ),
        ];
        for ((alpha, beta, lambda), points) in cases {
            let p = MlParams::new(alpha, beta, lambda).unwrap();
            let values = ml_values(&p, 40).unwrap();
            for (t, expected) in points {
                assert!(
                    rel_err(values[t], expected) <= 1e-12,
                    "E({alpha},{beta},{lambda}; {t}) = {} vs {expected}",
                    values[t]
                );
            }
        }
    }

    #[test]
    fn ml_at_zero_picks_the_surviving_term() {
        let p = MlParams::new(0.3, 1.3, 0.4).unwrap();
        assert_eq!(ml_eval(&p, 0).unwrap(), 0.0);
        // 2·0.3 + 0.4 − 1 = 0: only k = 2 survives
        let p = MlParams::new(0.3, 0.4, -0.5).unwrap();
        assert_relative_eq!(ml_eval(&p, 0).unwrap(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn series_agrees_where_well_conditioned() {
        for (alpha, beta, lambda) in [
            (0.3, 1.0, 0.4),
            (0.3, 1.0, -0.4),
            (0.25, 1.25, -1.0 / 3.0),
            (0.8, 2.0, 0.1),
        ] {
            let p = MlParams::<f64>::new(alpha, beta, lambda).unwrap();
            let values = ml_values(&p, 30).unwrap();
            for t in 0..=30 {
                let s = ml_series(&p, t).unwrap();
                assert!(
                    (s - values[t]).abs() <= 1e-12 * values[t].abs().max(1.0),
                    "t={t}: {s} vs {}",
                    values[t]
                );
            }
        }
    }

    #[test]
    fn series_reports_non_convergence() {
        let p = MlParams::new(0.3, 1.0, 0.999_999).unwrap();
        assert_eq!(
            ml_series(&p, 200),
            Err(Error::NoConvergence { t: 200, terms: 500 })
        );
        let p = MlParams::new(0.45, 1.0, -0.45 / 0.55).unwrap();
        assert!(matches!(
            ml_series(&p, 40),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn ml_params_are_validated() {
        assert!(MlParams::new(0.3, 1.0, 1.0).is_err());
        assert!(MlParams::new(0.0, 1.0, 0.5).is_err());
        assert!(MlParams::new(0.3, -1.0, 0.5).is_err());
    }

    #[test]
    fn builtin_kernel_examples() {
        let rl = Kernel::<f64>::rl_sum(0.5).unwrap();
        assert_relative_eq!(rl.value(1).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(rl.value(2).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(rl.value(0).unwrap(), 0.0);

        assert_eq!(Kernel::<f64>::rl_diff(0.5).unwrap().value(0).unwrap(), 0.0);
        assert_eq!(
            Kernel::<f64>::exponential(0.5).unwrap().value(3).unwrap(),
            0.125
        );
        let c = Kernel::<f64>::constant();
        assert!((0..50).all(|m| c.value(m).unwrap() == 1.0));

        let one = Kernel::<f64>::rl_sum(1.0).unwrap();
        assert!((0..20).all(|m| one.value(m).unwrap() == 1.0));
    }

    #[test]
    fn kernel_orders_are_validated() {
        assert!(matches!(
            Kernel::<f64>::rl_diff(1.0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            Kernel::<f64>::rl_diff(2.0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            Kernel::<f64>::exponential(1.0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            Kernel::<f64>::exponential(0.0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            Kernel::<f64>::rl_sum(0.0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(Kernel::<f64>::rl_diff(1.5).is_ok());
    }

    #[test]
    fn rising_and_falling_kernels_coincide() {
        for alpha in [0.1, 0.25, 0.5, 0.75, 0.9, 0.37] {
            let pairs = [
                (
                    Kernel::<f64>::rl_sum(alpha).unwrap(),
                    Kernel::rl_sum_falling(alpha).unwrap(),
                ),
                (
                    Kernel::rl_diff(alpha).unwrap(),
                    Kernel::rl_diff_falling(alpha).unwrap(),
                ),
            ];
            for (rising, falling) in pairs {
                assert_eq!(falling.value(0).unwrap(), 0.0);
                for m in 1..=100 {
                    let (r, f) = (rising.value(m).unwrap(), falling.value(m).unwrap());
                    assert!(rel_err(f, r) <= 1e-12, "α={alpha} m={m}: {f} vs {r}");
                }
            }
        }
    }

    #[test]
    fn memoized_values_do_not_depend_on_request_order() {
        let p = MlParams::<f64>::new(0.3, 1.0, -0.4).unwrap();
        let a = Kernel::mittag_leffler(p);
        let b = Kernel::mittag_leffler(p);
        let late = a.value(37).unwrap();
        for m in 0..=60 {
            assert_eq!(a.value(m).unwrap().to_bits(), b.value(m).unwrap().to_bits());
        }
        assert_eq!(late.to_bits(), b.value(37).unwrap().to_bits());

        let rl = Kernel::<f64>::rl_diff(0.3).unwrap();
        let first = rl.value(90).unwrap();
        let fresh = Kernel::<f64>::rl_diff(0.3).unwrap();
        for m in (0..=90).rev() {
            fresh.value(m).unwrap();
        }
        assert_eq!(first.to_bits(), fresh.value(90).unwrap().to_bits());
    }

    #[test]
    fn memo_is_safe_under_concurrent_reads() {
        let kernel = Kernel::<f64>::rl_sum(0.4).unwrap();
        let reference: Vec<f64> = (0..=400)
            .map(|m| Kernel::<f64>::rl_sum(0.4).unwrap().value(m).unwrap())
            .collect();
        std::thread::scope(|scope| {
            for worker in 0..8 {
                let kernel = kernel.clone();
                let reference = &reference;
                scope.spawn(move || {
                    for step in 0..400 {
                        let m = (step * 7 + worker * 13) % 401;
                        assert_eq!(kernel.value(m).unwrap().to_bits(), reference[m].to_bits());
                    }
                });
            }
        });
    }

    #[test]
    fn advanced_kernel_reads_further_out() {
        let k = Kernel::<f64>::rl_sum(0.5).unwrap();
        let adv = k.advanced(1);
        for m in 0..30 {
            assert_eq!(
                adv.value(m).unwrap().to_bits(),
                k.value(m + 1).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn tabulated_kernel_bounds() {
        let k = Kernel::tabulated("t", vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(k.value(2).unwrap(), 3.0);
        assert!(matches!(
            k.value(3),
            Err(Error::KernelOutOfRange { offset: 3, .. })
        ));
        assert_eq!(k.advanced(1).value(1).unwrap(), 3.0);
        assert!(k.advanced(1).value(2).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        let k: Kernel<f64> =
            kernel_from_spec("mittag_leffler(alpha=0.3,beta=1,lambda=-0.42857142857)").unwrap();
        assert_eq!(k.name(), "mittag_leffler");
        let again: Kernel<f64> = kernel_from_spec(&k.spec()).unwrap();
        assert_eq!(again.value(7).unwrap(), k.value(7).unwrap());

        assert_eq!(
            kernel_from_spec::<f64>("constant").unwrap().name(),
            "constant"
        );
        assert_eq!(
            kernel_from_spec::<f64>("rl_sum(alpha=0.5)").unwrap().spec(),
            "rl_sum(alpha=0.5)"
        );
        assert!(matches!(
            kernel_from_spec::<f64>("nope(alpha=1)"),
            Err(Error::UnknownKernel(_))
        ));
        assert!(matches!(
            kernel_from_spec::<f64>("rl_sum(alpha=x)"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            kernel_from_spec::<f64>("rl_sum(alpha=0.5"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            kernel_from_spec::<f64>("rl_sum"),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            kernel_from_spec::<f64>("constant(alpha=1)"),
            Err(Error::InvalidParameter(_))
        ));
    }
}
