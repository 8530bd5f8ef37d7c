//! Fractional sums and differences built on the convolutions: the
//! generalized (kernel-driven) operators, the classical Riemann-Liouville and
//! Caputo operators, and the AB/CF-like `G` family.
//!
//! Output bases follow the natural domain of each operator:
//!
//! | operator | base | offsets |
//! |---|---|---|
//! | nabla sums, `g_sum` | `x0` | `0..=N` (sum part of offset 0 is empty) |
//! | nabla differences, `gr_diff`, `gc_diff` | `x0 + 1` | `N` values |
//! | delta generalized sum | `x0` | `0..=N+1` |
//! | delta generalized differences | `x0` | `0..=N` |
//! | classical delta sum | `x0 + α` | `0..=N` |
//! | classical delta differences | `x0 + 1 − α` | `0..N` |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::convolution::{delta_convolution, nabla_convolution, nabla_of_convolution};
use crate::error::{Error, Result};
use crate::grid::{backward_difference, forward_difference, GridFunction};
use crate::kernels::{kernel_from_spec, Kernel, MlParams};
use crate::numerics::{falling_factorial, gamma};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Nabla,
    Delta,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nabla" => Ok(Mode::Nabla),
            "delta" => Ok(Mode::Delta),
            other => Err(Error::Parse(format!(
                "mode must be `nabla` or `delta`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Nabla => "nabla",
            Mode::Delta => "delta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Rl,
    Caputo,
}

/// The normalizing function `B(α) > 0` of the AB/CF-like operators.
#[derive(Clone)]
pub enum Normalization<T> {
    Constant(T),
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> Default for Normalization<T> {
    fn default() -> Self {
        Normalization::Constant(T::one())
    }
}

impl<T: fmt::Debug> fmt::Debug for Normalization<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::Constant(b) => write!(f, "Constant({b:?})"),
            Normalization::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: Real> Normalization<T> {
    pub fn custom(rule: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Normalization::Custom(Arc::new(rule))
    }

    /// `B(α)`; fails unless it is finite and positive.
    pub fn value(&self, alpha: T) -> Result<T> {
        let b = match self {
            Normalization::Constant(b) => *b,
            Normalization::Custom(rule) => rule(alpha),
        };
        if b > T::zero() && b.is_finite() {
            Ok(b)
        } else {
            Err(Error::InvalidParameter(format!(
                "normalization B({alpha}) = {b} must be positive"
            )))
        }
    }
}

fn unit_interval<T: Real>(context: &str, alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::order(
            format!("{context} (requires 0 < α < 1)"),
            alpha.to_f64_lossy(),
        ))
    }
}

/// Generalized sum `S_p y`: the nabla or delta convolution of `p` with `y`.
pub fn gen_sum<T: Real>(
    kernel: &Kernel<T>,
    y: &GridFunction<T>,
    mode: Mode,
) -> Result<GridFunction<T>> {
    match mode {
        Mode::Nabla => nabla_convolution(kernel, y),
        Mode::Delta => delta_convolution(kernel, y),
    }
}

/// Generalized Riemann-Liouville-type difference: the difference of the
/// convolution of `q` with `y`.
pub fn gen_rl_diff<T: Real>(
    kernel: &Kernel<T>,
    y: &GridFunction<T>,
    mode: Mode,
) -> Result<GridFunction<T>> {
    if y.length() == 0 {
        return Err(Error::EmptyGrid);
    }
    match mode {
        Mode::Nabla => nabla_of_convolution(kernel, y),
        Mode::Delta => forward_difference(&delta_convolution(kernel, y)?),
    }
}

/// Generalized Caputo-type difference: the convolution of `q` with the
/// difference of `y`.
pub fn gen_caputo_diff<T: Real>(
    kernel: &Kernel<T>,
    y: &GridFunction<T>,
    mode: Mode,
) -> Result<GridFunction<T>> {
    if y.length() == 0 {
        return Err(Error::EmptyGrid);
    }
    match mode {
        Mode::Nabla => {
            // ∇y lives on x0+1..; index it from x0 so offset s holds (∇y)(x0 + s)
            let dy = backward_difference(y)?.extended_back(T::zero());
            nabla_convolution(kernel, &dy)?.rebased(1)
        }
        Mode::Delta => {
            let dy = forward_difference(y)?;
            delta_convolution(kernel, &dy)
        }
    }
}

/// Classical Riemann-Liouville fractional sum of order `α > 0`.
pub fn classical_frac_sum<T: Real>(
    alpha: T,
    y: &GridFunction<T>,
    mode: Mode,
) -> Result<GridFunction<T>> {
    match mode {
        Mode::Nabla => gen_sum(&Kernel::rl_sum(alpha)?, y, Mode::Nabla),
        Mode::Delta => {
            if !(alpha > T::zero() && alpha.is_finite()) {
                return Err(Error::order(
                    "delta fractional sum (order must be > 0)",
                    alpha.to_f64_lossy(),
                ));
            }
            let one = T::one();
            let weights = (0..=y.length())
                .map(|m| falling_factorial(T::from_usize_lossy(m) + alpha - one, alpha - one))
                .collect::<Result<Vec<_>>>()?;
            let values = falling_convolution(&weights, y.values(), gamma(alpha));
            Ok(GridFunction::from_parts_unchecked(y.base() + alpha, values))
        }
    }
}

/// Classical Riemann-Liouville or Caputo fractional difference of order `α ∈ (0, 1)`.
pub fn classical_frac_diff<T: Real>(
    alpha: T,
    y: &GridFunction<T>,
    flavor: Flavor,
    mode: Mode,
) -> Result<GridFunction<T>> {
    unit_interval("classical fractional difference", alpha)?;
    if y.length() == 0 {
        return Err(Error::EmptyGrid);
    }
    match mode {
        Mode::Nabla => {
            let kernel = Kernel::rl_diff(alpha)?;
            match flavor {
                Flavor::Rl => gen_rl_diff(&kernel, y, Mode::Nabla),
                Flavor::Caputo => gen_caputo_diff(&kernel, y, Mode::Nabla),
            }
        }
        Mode::Delta => {
            let base = y.base() + T::one() - alpha;
            let weights = (0..=y.length())
                .map(|m| falling_factorial(T::from_usize_lossy(m) - alpha, -alpha))
                .collect::<Result<Vec<_>>>()?;
            let g1a = gamma(T::one() - alpha);
            let values = match flavor {
                Flavor::Rl => {
                    let sums = falling_convolution(&weights, y.values(), g1a);
                    sums.windows(2).map(|w| w[1] - w[0]).collect()
                }
                Flavor::Caputo => {
                    let dy = forward_difference(y)?;
                    falling_convolution(&weights, dy.values(), g1a)
                }
            };
            Ok(GridFunction::from_parts_unchecked(base, values))
        }
    }
}

// k ↦ (1/g) Σ_{j=0..k} w(k − j) y(j)
fn falling_convolution<T: Real>(weights: &[T], y: &[T], g: T) -> Vec<T> {
    (0..y.len())
        .map(|k| {
            let mut acc = T::zero();
            for j in 0..=k {
                acc = acc + weights[k - j] * y[j];
            }
            acc / g
        })
        .collect()
}

/// AB/CF-like sum `((1−α)/B) y + (α/B) S_p y` on `x0..`.
pub fn g_sum<T: Real>(
    kernel: &Kernel<T>,
    alpha: T,
    b: &Normalization<T>,
    y: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    unit_interval("g_sum", alpha)?;
    let b = b.value(alpha)?;
    let local = (T::one() - alpha) / b;
    let memory = alpha / b;
    let s = nabla_convolution(kernel, y)?;
    let values = y
        .values()
        .iter()
        .zip(s.values())
        .map(|(&yk, &sk)| local * yk + memory * sk)
        .collect();
    Ok(GridFunction::from_parts_unchecked(y.base(), values))
}

/// ABR/CFR-like difference `(B/(1−α))` times the generalized RL difference.
pub fn gr_diff<T: Real>(
    kernel: &Kernel<T>,
    alpha: T,
    b: &Normalization<T>,
    y: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    unit_interval("gr_diff", alpha)?;
    let scale = b.value(alpha)? / (T::one() - alpha);
    Ok(gen_rl_diff(kernel, y, Mode::Nabla)?.map(|v| scale * v))
}

/// ABC/CFC-like difference `(B/(1−α))` times the generalized Caputo difference.
pub fn gc_diff<T: Real>(
    kernel: &Kernel<T>,
    alpha: T,
    b: &Normalization<T>,
    y: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    unit_interval("gc_diff", alpha)?;
    let scale = b.value(alpha)? / (T::one() - alpha);
    Ok(gen_caputo_diff(kernel, y, Mode::Nabla)?.map(|v| scale * v))
}

/// `λ = −α/(1−α)`, the Mittag-Leffler rate of the AB operators.
pub fn ab_lambda<T: Real>(alpha: T) -> T {
    -alpha / (T::one() - alpha)
}

/// An operator ready to apply to a grid function.
#[derive(Debug, Clone)]
pub enum OperatorSpec<T> {
    GenSum {
        kernel: Kernel<T>,
        mode: Mode,
    },
    GenRlDiff {
        kernel: Kernel<T>,
        mode: Mode,
    },
    GenCaputoDiff {
        kernel: Kernel<T>,
        mode: Mode,
    },
    GSum {
        kernel: Kernel<T>,
        alpha: T,
        b: Normalization<T>,
    },
    GrDiff {
        kernel: Kernel<T>,
        alpha: T,
        b: Normalization<T>,
    },
    GcDiff {
        kernel: Kernel<T>,
        alpha: T,
        b: Normalization<T>,
    },
    ClassicalSum {
        alpha: T,
        mode: Mode,
    },
    ClassicalDiff {
        alpha: T,
        flavor: Flavor,
        mode: Mode,
    },
}

impl<T: Real> OperatorSpec<T> {
    pub fn apply(&self, y: &GridFunction<T>) -> Result<GridFunction<T>> {
        match self {
            OperatorSpec::GenSum { kernel, mode } => gen_sum(kernel, y, *mode),
            OperatorSpec::GenRlDiff { kernel, mode } => gen_rl_diff(kernel, y, *mode),
            OperatorSpec::GenCaputoDiff { kernel, mode } => gen_caputo_diff(kernel, y, *mode),
            OperatorSpec::GSum { kernel, alpha, b } => g_sum(kernel, *alpha, b, y),
            OperatorSpec::GrDiff { kernel, alpha, b } => gr_diff(kernel, *alpha, b, y),
            OperatorSpec::GcDiff { kernel, alpha, b } => gc_diff(kernel, *alpha, b, y),
            OperatorSpec::ClassicalSum { alpha, mode } => classical_frac_sum(*alpha, y, *mode),
            OperatorSpec::ClassicalDiff {
                alpha,
                flavor,
                mode,
            } => classical_frac_diff(*alpha, y, *flavor, *mode),
        }
    }

    /// Whether the output's first offset is an empty convolution sum rather than a value of the operator.
    pub fn leading_empty_sum(&self) -> bool {
        matches!(
            self,
            OperatorSpec::GenSum { .. }
                | OperatorSpec::ClassicalSum {
                    mode: Mode::Nabla,
                    ..
                }
        )
    }

    pub fn kernel(&self) -> Option<&Kernel<T>> {
        match self {
            OperatorSpec::GenSum { kernel, .. }
            | OperatorSpec::GenRlDiff { kernel, .. }
            | OperatorSpec::GenCaputoDiff { kernel, .. }
            | OperatorSpec::GSum { kernel, .. }
            | OperatorSpec::GrDiff { kernel, .. }
            | OperatorSpec::GcDiff { kernel, .. } => Some(kernel),
            OperatorSpec::ClassicalSum { .. } | OperatorSpec::ClassicalDiff { .. } => None,
        }
    }
}

/// Preset operators: `ab_sum`, `abr`, `abc` (α ∈ (0, 0.5)), `cf_sum`, `cfr`,
/// `cfc` (α ∈ (0, 1)) and the classical nabla `rl_sum`, `rl_diff`, `caputo_diff`.
pub fn named_operator<T: Real>(
    name: &str,
    alpha: T,
    b: Normalization<T>,
) -> Result<OperatorSpec<T>> {
    let ab_range = |alpha: T| {
        if alpha > T::zero() && alpha < T::lit(0.5) {
            Ok(())
        } else {
            Err(Error::order(
                format!("{name} (requires 0 < α < 0.5)"),
                alpha.to_f64_lossy(),
            ))
        }
    };
    let ml_kernel = |alpha: T| -> Result<Kernel<T>> {
        Ok(Kernel::mittag_leffler(MlParams::new(
            alpha,
            T::one(),
            ab_lambda(alpha),
        )?))
    };
    Ok(match name {
        "ab_sum" => {
            ab_range(alpha)?;
            OperatorSpec::GSum {
                kernel: Kernel::rl_sum(alpha)?,
                alpha,
                b,
            }
        }
        "abr" => {
            ab_range(alpha)?;
            OperatorSpec::GrDiff {
                kernel: ml_kernel(alpha)?,
                alpha,
                b,
            }
        }
        "abc" => {
            ab_range(alpha)?;
            OperatorSpec::GcDiff {
                kernel: ml_kernel(alpha)?,
                alpha,
                b,
            }
        }
        "cf_sum" => {
            unit_interval(name, alpha)?;
            OperatorSpec::GSum {
                kernel: Kernel::constant(),
                alpha,
                b,
            }
        }
        "cfr" => OperatorSpec::GrDiff {
            kernel: Kernel::exponential(alpha)?,
            alpha,
            b,
        },
        "cfc" => OperatorSpec::GcDiff {
            kernel: Kernel::exponential(alpha)?,
            alpha,
            b,
        },
        "rl_sum" => {
            Kernel::rl_sum(alpha)?;
            OperatorSpec::ClassicalSum {
                alpha,
                mode: Mode::Nabla,
            }
        }
        "rl_diff" | "caputo_diff" => {
            unit_interval(name, alpha)?;
            let flavor = if name == "rl_diff" {
                Flavor::Rl
            } else {
                Flavor::Caputo
            };
            OperatorSpec::ClassicalDiff {
                alpha,
                flavor,
                mode: Mode::Nabla,
            }
        }
        other => return Err(Error::UnknownOperator(other.to_string())),
    })
}

// splits on ':' outside parentheses
fn split_top_level(spec: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in spec.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced `)` in `{spec}`")));
                }
            }
            ':' if depth == 0 => {
                parts.push(spec[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced `(` in `{spec}`")));
    }
    parts.push(spec[start..].trim());
    Ok(parts)
}

/// Parses an operator spec.
///
/// Grammar: `family:kernel[:alpha=a][:B=b][:mode=nabla|delta]`, where
/// `family` is one of `gen_sum`, `gen_rl_diff`, `gen_caputo_diff`, `g_sum`,
/// `gr_diff`, `gc_diff`; or `preset[:alpha=a][:B=b][:mode=…]` with a preset of
/// [`named_operator`]. `mode` is accepted by the generalized families and by
/// `rl_sum`, `rl_diff`, `caputo_diff`. Kernel names found in `custom` (for
/// instance tabulated kernels) take precedence over the built-ins.
pub fn parse_operator_spec<T: Real>(
    spec: &str,
    custom: &BTreeMap<String, Kernel<T>>,
) -> Result<OperatorSpec<T>> {
    let parts = split_top_level(spec)?;
    let family = parts[0];
    const GENERALIZED: [&str; 6] = [
        "gen_sum",
        "gen_rl_diff",
        "gen_caputo_diff",
        "g_sum",
        "gr_diff",
        "gc_diff",
    ];
    let (kernel_part, options) = if GENERALIZED.contains(&family) {
        let kernel = parts.get(1).filter(|k| !k.is_empty()).ok_or_else(|| {
            Error::Parse(format!(
                "operator `{family}` needs a kernel: `{family}:<kernel>`"
            ))
        })?;
        (Some(*kernel), &parts[2..])
    } else {
        (None, &parts[1..])
    };

    let mut opts = BTreeMap::new();
    for option in options {
        let (key, value) = option
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{option}`")))?;
        if opts.insert(key.trim(), value.trim()).is_some() {
            return Err(Error::Parse(format!("option `{}` given twice", key.trim())));
        }
    }
    let number = |key: &str| -> Result<Option<T>> {
        opts.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Parse(format!("`{key}={v}` is not a number")))
            })
            .transpose()
    };
    if let Some(key) = opts.keys().find(|k| !["alpha", "B", "mode"].contains(k)) {
        return Err(Error::Parse(format!("unknown operator option `{key}`")));
    }
    let alpha = number("alpha")?;
    let b = number("B")?.map(Normalization::Constant);
    let mode: Option<Mode> = opts.get("mode").map(|m| m.parse()).transpose()?;
    let need_alpha =
        || alpha.ok_or_else(|| Error::Parse(format!("operator `{family}` needs `alpha=`")));

    let Some(kernel_part) = kernel_part else {
        const PRESETS: [&str; 9] = [
            "ab_sum",
            "abr",
            "abc",
            "cf_sum",
            "cfr",
            "cfc",
            "rl_sum",
            "rl_diff",
            "caputo_diff",
        ];
        if !PRESETS.contains(&family) {
            return Err(Error::UnknownOperator(family.to_string()));
        }
        let alpha = need_alpha()?;
        if !matches!(family, "rl_sum" | "rl_diff" | "caputo_diff") && mode.is_some() {
            return Err(Error::Parse(format!(
                "operator `{family}` has no delta form"
            )));
        }
        if b.is_some() && !matches!(family, "ab_sum" | "abr" | "abc" | "cf_sum" | "cfr" | "cfc") {
            return Err(Error::Parse(format!(
                "operator `{family}` takes no normalization"
            )));
        }
        let mut op = named_operator(family, alpha, b.unwrap_or_default())?;
        match &mut op {
            OperatorSpec::ClassicalSum { mode: m, .. }
            | OperatorSpec::ClassicalDiff { mode: m, .. } => {
                *m = mode.unwrap_or_default();
            }
            _ => {}
        }
        return Ok(op);
    };

    let kernel = match custom.get(kernel_part) {
        Some(k) => k.clone(),
        None => kernel_from_spec(kernel_part)?,
    };
    let is_g = family.starts_with('g') && !family.starts_with("gen");
    if is_g {
        if mode.is_some_and(|m| m == Mode::Delta) {
            return Err(Error::Parse(format!(
                "operator `{family}` has no delta form"
            )));
        }
        let alpha = need_alpha()?;
        let b = b.unwrap_or_default();
        return Ok(match family {
            "g_sum" => OperatorSpec::GSum { kernel, alpha, b },
            "gr_diff" => OperatorSpec::GrDiff { kernel, alpha, b },
            _ => OperatorSpec::GcDiff { kernel, alpha, b },
        });
    }
    if alpha.is_some() || b.is_some() {
        return Err(Error::Parse(format!(
            "operator `{family}` takes no `alpha`/`B`; put the order in the kernel"
        )));
    }
    let mode = mode.unwrap_or_default();
    Ok(match family {
        "gen_sum" => OperatorSpec::GenSum { kernel, mode },
        "gen_rl_diff" => OperatorSpec::GenRlDiff { kernel, mode },
        _ => OperatorSpec::GenCaputoDiff { kernel, mode },
    })
}
