//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 usage error, 2 input error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{
    correlation_kf_kappa, format_bench_csv, run_directory_suite, run_gaussian_suite_with,
    BenchConfig,
};
use crate::error::{Error, Result};
use crate::group::{BlockPartition, GroupScheme, Side};
use crate::io::{format_report_csv, read_matrix, read_polysys, write_matrix};
use crate::matrix::{
    condition_euclidean, condition_frobenius, condition_skeel, jacobi_precondition,
    sinkhorn_equilibrate, ComplexMatrix, JacobiMode,
};
use crate::optimizer::{minimize_condition, OptimizationReport, OptimizerConfig};
use crate::polysys::{
    act, local_condition, precondition_full, precondition_shuffle, precondition_sparse, shuffle,
    torus_rescale, NormKind,
};
use crate::stochastic::{minimize_condition_stochastic, EstimatorConfig};

#[derive(Parser, Debug)]
#[command(name = "geoprec", version, about = "Structured preconditioners by geodesically convex optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Diag,
    Block,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Left,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ActionArg {
    Shuffle,
    Full,
    Sparse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Frobenius,
    Euclidean,
    Skeel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    JacobiLeft,
    JacobiSym,
    Sinkhorn,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Gaussian,
    Dir,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a diagonal or block-diagonal preconditioner for a matrix.
    Precondition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "diag")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 1)]
        block_size: usize,
        #[arg(long, value_enum, default_value = "left")]
        side: SideArg,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Estimate gradients with Hutchinson probes and CG solves.
        #[arg(long)]
        stochastic: bool,
        #[arg(long, default_value_t = 100)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV trace; written to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `X.mtx` or `X.mtx,Y.mtx`.
        #[arg(long, value_delimiter = ',')]
        emit_preconditioner: Vec<PathBuf>,
    },
    /// Precondition a polynomial system at the point stored in its file.
    PolysysPrecondition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "shuffle")]
        action: ActionArg,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a condition number of a matrix.
    Condition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "frobenius")]
        kind: KindArg,
    },
    /// Apply a heuristic scaling and report condition numbers.
    Baseline {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Write the scaled matrix here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare diagonal and block-diagonal preconditioning on a suite.
    Bench {
        #[arg(long, value_enum, default_value = "gaussian")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        block_size: usize,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        /// Directory of `.mtx` files for `--suite dir`.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summary(report: &OptimizationReport, label: &str, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "initial {label}: {}", report.initial_kf)?;
    writeln!(out, "final {label}: {}", report.final_kf)?;
    writeln!(out, "steps: {}", report.steps())?;
    writeln!(out, "termination: {:?}", report.termination)?;
    if let Some(c) = report.certificate {
        writeln!(out, "certificate: {c}")?;
    }
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Precondition {
            input,
            scheme,
            block_size,
            side,
            eps,
            max_iters,
            stochastic,
            probes,
            seed,
            out: csv,
            emit_preconditioner,
        } => {
            let a = read_matrix(&input)?;
            let (m, n) = a.shape();
            let side = match side {
                SideArg::Left => Side::LeftOnly,
                SideArg::Both => Side::LeftRight,
            };
            let scheme = match scheme {
                SchemeArg::Diag => GroupScheme::diagonal(side, m, n),
                SchemeArg::Block => GroupScheme::block(side, m, n, block_size)?,
            };
            let mut cfg = OptimizerConfig::new(scheme).with_eps(eps).with_max_iters(max_iters);
            cfg.seed = seed;
            let report = if stochastic {
                let est = EstimatorConfig {
                    num_probes: probes,
                    seed,
                    ..EstimatorConfig::default()
                };
                minimize_condition_stochastic(&a, &cfg, &est, false)?
            } else {
                minimize_condition(&a, &cfg)?
            };
            let text = format_report_csv(&report);
            if csv.is_some() {
                emit(&csv, &text, out)?;
                summary(&report, "kF", out)?;
            } else {
                emit(&None, &text, out)?;
            }
            match emit_preconditioner.as_slice() {
                [] => {}
                [x] => write_matrix(x, &report.final_element.x_sparse())?,
                [x, y] => {
                    write_matrix(x, &report.final_element.x_sparse())?;
                    write_matrix(y, &report.final_element.y_sparse())?;
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "--emit-preconditioner takes one or two paths".into(),
                    ))
                }
            }
            Ok(())
        }
        Command::PolysysPrecondition {
            input,
            action,
            eps,
            max_iters,
            out: csv,
        } => {
            let (f, point) = read_polysys(&input)?;
            let xi = point.ok_or_else(|| {
                Error::InvalidArgument("the system file must contain a point".into())
            })?;
            let (m, n) = (f.len(), f.nvars());
            let before = local_condition(&f, &xi, NormKind::Frobenius)?;
            let (report, after) = match action {
                ActionArg::Shuffle => {
                    let cfg = OptimizerConfig::new(GroupScheme::left_only(BlockPartition::full(m), m))
                        .with_eps(eps)
                        .with_max_iters(max_iters);
                    let (g, r) = precondition_shuffle(&f, &xi, &cfg)?;
                    let mu = local_condition(&shuffle(g.x(), &f)?, &xi, NormKind::Frobenius)?;
                    (r, mu)
                }
                ActionArg::Full => {
                    let cfg = OptimizerConfig::new(GroupScheme::left_right(
                        BlockPartition::full(m),
                        BlockPartition::full(n),
                    ))
                    .with_eps(eps)
                    .with_max_iters(max_iters);
                    let (g, r) = precondition_full(&f, &xi, &cfg)?;
                    let yxi: Vec<_> = (g.y() * nalgebra::DVector::from_column_slice(&xi))
                        .iter()
                        .copied()
                        .collect();
                    let mu = local_condition(&act(g.x(), g.y(), &f)?, &yxi, NormKind::Frobenius)?;
                    (r, mu)
                }
                ActionArg::Sparse => {
                    let cfg = OptimizerConfig::new(GroupScheme::left_only(BlockPartition::full(m), m))
                        .with_eps(eps)
                        .with_max_iters(max_iters);
                    let (g, t, r) = precondition_sparse(&f, &xi, &cfg)?;
                    let ft = shuffle(g.x(), &torus_rescale(&f, &t)?)?;
                    let mu = local_condition(&ft, &t.scale_point(&xi), NormKind::Frobenius)?;
                    (r, mu)
                }
            };
            let text = format_report_csv(&report);
            emit(&csv, &text, out)?;
            if csv.is_some() {
                writeln!(out, "initial muF: {before}")?;
                writeln!(out, "final muF: {after}")?;
                writeln!(out, "steps: {}", report.steps())?;
                writeln!(out, "termination: {:?}", report.termination)?;
            }
            Ok(())
        }
        Command::Condition { input, kind } => {
            let a = read_matrix(&input)?;
            let v = match kind {
                KindArg::Frobenius => condition_frobenius(&a)?,
                KindArg::Euclidean => condition_euclidean(&a)?,
                KindArg::Skeel => condition_skeel(&a)?,
            };
            writeln!(out, "{v}")?;
            Ok(())
        }
        Command::Baseline {
            input,
            method,
            out: path,
        } => {
            let a = read_matrix(&input)?;
            let scaled: ComplexMatrix = match method {
                MethodArg::JacobiLeft => jacobi_precondition(&a, JacobiMode::Left)?,
                MethodArg::JacobiSym => jacobi_precondition(&a, JacobiMode::TwoSided)?,
                MethodArg::Sinkhorn => sinkhorn_equilibrate(&a, 10_000, 1e-12)?.apply(&a),
            };
            writeln!(out, "kF before: {}", condition_frobenius(&a)?)?;
            writeln!(out, "kF after: {}", condition_frobenius(&scaled)?)?;
            writeln!(out, "kappa before: {}", condition_euclidean(&a)?)?;
            writeln!(out, "kappa after: {}", condition_euclidean(&scaled)?)?;
            if let Some(p) = path {
                write_matrix(p, &scaled)?;
            }
            Ok(())
        }
        Command::Bench {
            suite,
            n,
            samples,
            seed,
            block_size,
            eps,
            max_iters,
            dir,
            out: csv,
        } => {
            let cfg = BenchConfig {
                block_size,
                target_eps: eps,
                max_iters,
            };
            let results = match suite {
                SuiteArg::Gaussian => run_gaussian_suite_with(n, samples, seed, &cfg)?,
                SuiteArg::Dir => {
                    let d = dir.ok_or_else(|| {
                        Error::InvalidArgument("--suite dir needs --dir".into())
                    })?;
                    run_directory_suite(d, &cfg)?
                }
            };
            emit(&csv, &format_bench_csv(&results), out)?;
            if csv.is_some() && !results.is_empty() {
                let k = results.len() as f64;
                let diag = results.iter().map(|r| r.diag_improvement()).sum::<f64>() / k;
                let block = results.iter().map(|r| r.block_improvement()).sum::<f64>() / k;
                writeln!(out, "mean diag improvement: {diag}")?;
                writeln!(out, "mean block improvement: {block}")?;
                if let Ok(rho) = correlation_kf_kappa(&results) {
                    writeln!(out, "correlation: {rho}")?;
                }
            }
            Ok(())
        }
    }
}
