//! Diagonal vs block-diagonal preconditioning over a small Gaussian suite.
//! The full-size experiment is `geoprec bench --n 50 --samples 30 --seed 42`.

use geoprec::bench::{correlation_kf_kappa, format_bench_csv, run_gaussian_suite};

fn main() -> geoprec::Result<()> {
    let results = run_gaussian_suite(20, 8, 4, 42)?;
    print!("{}", format_bench_csv(&results));
    let k = results.len() as f64;
    let diag = results.iter().map(|r| r.diag_improvement()).sum::<f64>() / k;
    let block = results.iter().map(|r| r.block_improvement()).sum::<f64>() / k;
    println!("mean kF improvement: diagonal {diag:.3}, blocks of 4 {block:.3}");
    println!("correlation of kF and kappa improvements: {:.3}", correlation_kf_kappa(&results)?);
    Ok(())
}
