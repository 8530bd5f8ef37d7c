//! `dfrac`: apply discrete fractional operators to sequence files, check
//! kernel classes, run the identity suite and tabulate Mittag-Leffler values.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 numeric error.

mod error;
mod seqfile;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discrete_frac::operators::ab_lambda;
use discrete_frac::verify::{
    check_class, run_suite, ClassTarget, KernelPair, Suite, SuiteConfig, VerifyReport, DEFAULT_TOL,
    ML_TOL,
};
use discrete_frac::{
    kernel_from_spec, ml_series, ml_values, parse_operator_spec, GridFunction64, Kernel64,
    MlParams64,
};

use error::CliError;
use seqfile::Sequence;

#[derive(Parser, Debug)]
#[command(
    name = "dfrac",
    version,
    about = "Discrete fractional sums and differences"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Grid base; for `apply` it overrides the `# base=` line of the input.
    #[arg(long, global = true, allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Tolerance (defaults depend on the check).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Grid length N.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply an operator, e.g. `gen_sum:rl_sum(alpha=0.5)` or `cfr:alpha=0.5`.
    Apply {
        spec: String,
        input: PathBuf,
        /// Tabulated kernel `NAME=PATH` (sequence file, offsets are kernel offsets).
        #[arg(long = "kernel-file", value_name = "NAME=PATH")]
        kernel_files: Vec<String>,
    },
    /// Check that a kernel pair belongs to a convolution class.
    CheckClass {
        p: String,
        q: String,
        /// unit-nabla, unit-delta, ab or cf.
        class: String,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Mittag-Leffler rate of the ab class (default −α/(1−α)).
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long = "kernel-file", value_name = "NAME=PATH")]
        kernel_files: Vec<String>,
    },
    /// Run a group of identity checks.
    Verify {
        /// all, class, dual, ftc, power-rule, rl-caputo, ml-shift or leibniz.
        suite: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Tabulate the discrete Mittag-Leffler function for t = 0..=tmax.
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        tmax: usize,
        /// Sum the defining series directly instead of the recurrence.
        #[arg(long)]
        series: bool,
    },
}

enum Outcome {
    Done,
    Verified(bool),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) | Ok(Outcome::Verified(true)) => ExitCode::SUCCESS,
        Ok(Outcome::Verified(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dfrac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Apply {
            spec,
            input,
            kernel_files,
        } => {
            let kernels = load_kernels(kernel_files)?;
            let op = parse_operator_spec(spec, &kernels)?;
            let seq = seqfile::parse(&read(input)?, &input.display().to_string())?;
            let origin = g.x0.or(seq.base).unwrap_or(0.0) + seq.start as f64;
            let y = GridFunction64::new(origin, seq.values)?;
            let out = op.apply(&y)?;
            emit(
                g,
                &seqfile::render(&relative_to(
                    origin,
                    seq.start,
                    &out,
                    op.leading_empty_sum(),
                ))?,
            )?;
            Ok(Outcome::Done)
        }
        Command::CheckClass {
            p,
            q,
            class,
            alpha,
            lambda,
            kernel_files,
        } => {
            let kernels = load_kernels(kernel_files)?;
            let target = class_target(class, *alpha, *lambda)?;
            let pair = KernelPair::new(kernel(p, &kernels)?, kernel(q, &kernels)?, target)?;
            let default_tol = match target {
                ClassTarget::Ab { .. } => ML_TOL,
                _ => DEFAULT_TOL,
            };
            let report = check_class(
                &pair,
                g.x0.unwrap_or(0.0),
                g.n.unwrap_or(100),
                g.tol.unwrap_or(default_tol),
            )?;
            eprintln!("{report}");
            emit(
                g,
                &json(serde_json::to_value(&report).expect("report serializes")),
            )?;
            Ok(Outcome::Verified(report.passed()))
        }
        Command::Verify { suite, alpha } => {
            let suite: Suite = suite.parse()?;
            let defaults = SuiteConfig::default();
            let cfg = SuiteConfig {
                n: g.n.unwrap_or(defaults.n),
                seed: g.seed.unwrap_or(defaults.seed),
                tol: g.tol,
                alpha: *alpha,
                x0: g.x0.unwrap_or(defaults.x0),
            };
            let reports = run_suite(suite, &cfg)?;
            let failed: Vec<&VerifyReport> = reports.iter().filter(|r| !r.passed()).collect();
            for r in &failed {
                eprintln!("{r}");
            }
            eprintln!("{} checks, {} failed", reports.len(), failed.len());
            emit(
                g,
                &json(serde_json::to_value(&reports).expect("reports serialize")),
            )?;
            Ok(Outcome::Verified(failed.is_empty()))
        }
        Command::Ml {
            alpha,
            beta,
            lambda,
            tmax,
            series,
        } => {
            let params = MlParams64::new(*alpha, *beta, *lambda)?;
            let values = if *series {
                (0..=*tmax)
                    .map(|t| ml_series(&params, t))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                ml_values(&params, *tmax)?
            };
            let seq = Sequence {
                base: Some(0.0),
                start: 0,
                values,
            };
            emit(g, &seqfile::render(&seq)?)?;
            Ok(Outcome::Done)
        }
    }
}

/// Re-expresses an operator output against the input grid: offsets count from
/// the input base and absorb any integer shift, the printed base keeps the
/// fractional part. A leading empty convolution sum is dropped.
fn relative_to(origin: f64, start: usize, out: &GridFunction64, skip_first: bool) -> Sequence {
    let shift = out.base() - origin;
    let whole = (shift + 1e-9).floor().max(0.0);
    let base = if (shift - whole).abs() < 1e-9 {
        origin
    } else {
        out.base() - whole
    };
    let skip = usize::from(skip_first);
    Sequence {
        base: Some(base - start as f64),
        start: start + whole as usize + skip,
        values: out.values()[skip.min(out.values().len())..].to_vec(),
    }
}

fn class_target(
    name: &str,
    alpha: Option<f64>,
    lambda: Option<f64>,
) -> Result<ClassTarget, CliError> {
    let need_alpha =
        || alpha.ok_or_else(|| CliError::Input(format!("class `{name}` needs --alpha")));
    Ok(match name {
        "unit-nabla" => ClassTarget::UnitNabla,
        "unit-delta" => ClassTarget::UnitDelta,
        "ab" => {
            let alpha = need_alpha()?;
            ClassTarget::Ab {
                alpha,
                lambda: lambda.unwrap_or_else(|| ab_lambda(alpha)),
            }
        }
        "cf" => ClassTarget::Cf {
            alpha: need_alpha()?,
        },
        other => {
            return Err(CliError::Input(format!(
                "unknown class `{other}` (expected unit-nabla, unit-delta, ab or cf)"
            )))
        }
    })
}

fn kernel(spec: &str, custom: &BTreeMap<String, Kernel64>) -> Result<Kernel64, CliError> {
    match custom.get(spec.trim()) {
        Some(k) => Ok(k.clone()),
        None => Ok(kernel_from_spec(spec)?),
    }
}

fn load_kernels(entries: &[String]) -> Result<BTreeMap<String, Kernel64>, CliError> {
    let mut kernels = BTreeMap::new();
    for entry in entries {
        let (name, path) = entry
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| {
                CliError::Input(format!("--kernel-file expects NAME=PATH, got `{entry}`"))
            })?;
        let path = Path::new(path);
        let seq = seqfile::parse(&read(path)?, &path.display().to_string())?;
        if seq.start != 0 {
            return Err(CliError::Input(format!(
                "{}: kernel offsets must start at 0",
                path.display()
            )));
        }
        kernels.insert(name.to_string(), Kernel64::tabulated(name, seq.values)?);
    }
    Ok(kernels)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(g: &Global, text: &str) -> Result<(), CliError> {
    match &g.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
