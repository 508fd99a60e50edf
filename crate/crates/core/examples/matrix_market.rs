//! Read a Matrix Market file, precondition it, and write the scaled matrix
//! and the scalings back out.
//!
//! `cargo run --example matrix_market -- path/to/A.mtx [outdir]`

use std::path::PathBuf;

use geoprec::group::{GroupScheme, Side};
use geoprec::io::{parse_matrix_market, read_matrix, write_matrix};
use geoprec::optimizer::{minimize_condition, OptimizerConfig};

const DEMO: &str = "%%MatrixMarket matrix coordinate real general
% lower bidiagonal with a wide range of scales
4 4 7
1 1 1e3
2 1 1
2 2 1e-2
3 2 5
3 3 1
4 3 1e2
4 4 1e4
";

fn main() -> geoprec::Result<()> {
    let mut args = std::env::args().skip(1);
    let a = match args.next() {
        Some(p) => read_matrix(p)?,
        None => parse_matrix_market(DEMO)?,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    let (m, n) = a.shape();
    println!("{m}x{n}, {} stored entries", a.nnz());

    let cfg = OptimizerConfig::new(GroupScheme::diagonal(Side::LeftRight, m, n)).with_eps(1e-4);
    let r = minimize_condition(&a, &cfg)?;
    println!("kF {:.4e} -> {:.4e}", r.initial_kf, r.final_kf);

    let g = &r.final_element;
    write_matrix(out.join("scaled.mtx"), &g.apply(&a)?)?;
    write_matrix(out.join("X.mtx"), &g.x_sparse())?;
    write_matrix(out.join("Y.mtx"), &g.y_sparse())?;
    println!("wrote scaled.mtx, X.mtx, Y.mtx to {}", out.display());
    Ok(())
}
