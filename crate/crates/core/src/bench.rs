//! Seeded desk-scale comparison of diagonal and block-diagonal left-right
//! preconditioning.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{GroupScheme, Side};
use crate::io::read_matrix;
use crate::matrix::ComplexMatrix;
use crate::optimizer::{minimize_condition, OptimizationReport, OptimizerConfig, Termination};
use crate::rng::{gaussian_matrix, substream};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub block_size: usize,
    pub target_eps: f64,
    pub max_iters: usize,
}

impl BenchConfig {
    pub fn new(block_size: usize) -> Self {
        BenchConfig {
            block_size,
            target_eps: 1e-2,
            max_iters: 500,
        }
    }
}

/// One instance: condition numbers before and after each scheme.
#[derive(Clone, Debug)]
pub struct BenchResult {
    pub id: String,
    pub n: usize,
    pub kf_before: f64,
    pub kf_diag: f64,
    pub kf_block: f64,
    pub kappa_before: f64,
    pub kappa_diag: f64,
    pub kappa_block: f64,
    pub iters_diag: usize,
    pub iters_block: usize,
    pub termination_diag: Termination,
    pub termination_block: Termination,
    /// Wall time of both runs; not part of the CSV so that output stays
    /// reproducible.
    pub wall_time: Duration,
}

impl BenchResult {
    pub fn diag_improvement(&self) -> f64 {
        self.kf_before / self.kf_diag
    }

    pub fn block_improvement(&self) -> f64 {
        self.kf_before / self.kf_block
    }
}

/// Run `f` on a pool capped by `GEOPREC_THREADS` when that is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("GEOPREC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn run_instance(id: String, a: &ComplexMatrix, cfg: &BenchConfig) -> Result<BenchResult> {
    let (m, n) = a.shape();
    let start = Instant::now();
    let run = |scheme: GroupScheme| -> Result<OptimizationReport> {
        let c = OptimizerConfig::new(scheme)
            .with_eps(cfg.target_eps)
            .with_max_iters(cfg.max_iters);
        minimize_condition(a, &c)
    };
    let d = run(GroupScheme::diagonal(Side::LeftRight, m, n))?;
    let b = run(GroupScheme::block(Side::LeftRight, m, n, cfg.block_size)?)?;
    Ok(BenchResult {
        id,
        n,
        kf_before: d.initial_kf,
        kf_diag: d.final_kf,
        kf_block: b.final_kf,
        kappa_before: d.initial_kappa,
        kappa_diag: d.final_kappa,
        kappa_block: b.final_kappa,
        iters_diag: d.steps(),
        iters_block: b.steps(),
        termination_diag: d.termination,
        termination_block: b.termination,
        wall_time: start.elapsed(),
    })
}

/// `samples` standard normal `n × n` matrices, sample `k` drawn from stream
/// `k` of `seed`. Results are ordered by sample index whatever the thread
/// count.
pub fn run_gaussian_suite(n: usize, samples: usize, block_size: usize, seed: u64) -> Result<Vec<BenchResult>> {
    run_gaussian_suite_with(n, samples, seed, &BenchConfig::new(block_size))
}

pub fn run_gaussian_suite_with(
    n: usize,
    samples: usize,
    seed: u64,
    cfg: &BenchConfig,
) -> Result<Vec<BenchResult>> {
    if cfg.block_size == 0 || n < 2 * cfg.block_size {
        return Err(Error::InvalidArgument(format!(
            "n = {n} must be at least twice the block size {}",
            cfg.block_size
        )));
    }
    with_thread_cap(|| {
        (0..samples)
            .into_par_iter()
            .map(|k| {
                let a = ComplexMatrix::from_dense(gaussian_matrix(&mut substream(seed, k as u64), n, n));
                run_instance(format!("gaussian-{k}"), &a, cfg)
            })
            .collect()
    })
}

/// Every `.mtx` file in `dir`, in file-name order.
pub fn run_directory_suite(dir: impl AsRef<Path>, cfg: &BenchConfig) -> Result<Vec<BenchResult>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mtx"))
        .collect();
    paths.sort();
    with_thread_cap(|| {
        paths
            .par_iter()
            .map(|p| {
                let a = read_matrix(p)?;
                let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                run_instance(id, &a, cfg)
            })
            .collect()
    })
}

/// Pearson correlation of two samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::dims("samples differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("{} points, need at least 3", xs.len())));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InsufficientData("a sample has zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between `log` improvement in `κ_F` and in `κ`, pooling the
/// diagonal and block runs of every instance.
pub fn correlation_kf_kappa(results: &[BenchResult]) -> Result<f64> {
    if results.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} results, need at least 3",
            results.len()
        )));
    }
    let mut xs = Vec::with_capacity(2 * results.len());
    let mut ys = Vec::with_capacity(2 * results.len());
    for r in results {
        xs.push((r.kf_before / r.kf_diag).ln());
        ys.push((r.kappa_before / r.kappa_diag).ln());
        xs.push((r.kf_before / r.kf_block).ln());
        ys.push((r.kappa_before / r.kappa_block).ln());
    }
    pearson(&xs, &ys)
}

pub const BENCH_HEADER: &str =
    "id,n,kF_before,kF_diag,kF_block,kappa_before,kappa_diag,kappa_block,iters_diag,iters_block,termination_diag,termination_block";

fn term(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max_iters",
        Termination::Certified => "certified",
    }
}

pub fn format_bench_csv(results: &[BenchResult]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.id,
            r.n,
            r.kf_before,
            r.kf_diag,
            r.kf_block,
            r.kappa_before,
            r.kappa_diag,
            r.kappa_block,
            r.iters_diag,
            r.iters_block,
            term(r.termination_diag),
            term(r.termination_block)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 4.0, 8.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson(&x[..2], &x[..2]), Err(Error::InsufficientData(_))));
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn pearson_matches_textbook_value() {
        // x = 1..5, y = (2, 4, 5, 4, 5): r = 6 / sqrt(10 * 6)
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
        assert!((r - 6.0 / 60f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn small_suite_is_deterministic_and_improves() {
        let cfg = BenchConfig {
            block_size: 3,
            target_eps: 1e-2,
            max_iters: 60,
        };
        let a = run_gaussian_suite_with(12, 4, 5, &cfg).unwrap();
        let b = run_gaussian_suite_with(12, 4, 5, &cfg).unwrap();
        assert_eq!(format_bench_csv(&a), format_bench_csv(&b));
        for r in &a {
            assert!(r.diag_improvement() >= 1.0 - 1e-9);
            assert!(r.block_improvement() >= 1.0 - 1e-9);
        }
        assert!(correlation_kf_kappa(&a[..2]).is_err());
    }

    #[test]
    fn block_size_is_checked() {
        assert!(matches!(run_gaussian_suite(5, 1, 3, 0), Err(Error::InvalidArgument(_))));
    }
}
