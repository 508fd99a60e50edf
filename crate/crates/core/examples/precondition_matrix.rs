//! Diagonal and block-diagonal preconditioning of a badly scaled matrix.
//!
//! Run with `cargo run --example precondition_matrix`.

use geoprec::group::{BlockPartition, GroupScheme, Side};
use geoprec::matrix::{condition_euclidean, ComplexMatrix, C64};
use geoprec::optimizer::{minimize_condition, OptimizerConfig};
use geoprec::rng::{gaussian_matrix, substream};

fn main() -> geoprec::Result<()> {
    let n = 12;
    let base = gaussian_matrix(&mut substream(1, 0), n, n);
    let rows: Vec<_> = (0..n).map(|i| C64::new(3f64.powi(i as i32 - 6), 0.0)).collect();
    let cols: Vec<_> = (0..n).map(|j| C64::new(2f64.powi(3 - (j as i32 % 7)), 0.0)).collect();
    let a = ComplexMatrix::from_dense(base).scale_rows_cols(&rows, &cols);
    println!("kappa(A) = {:.3e}", condition_euclidean(&a)?);

    let schemes = [
        ("left diagonal", GroupScheme::diagonal(Side::LeftOnly, n, n)),
        ("left-right diagonal", GroupScheme::diagonal(Side::LeftRight, n, n)),
        ("left 3x3 blocks", GroupScheme::left_only(BlockPartition::uniform(n, 3)?, n)),
        ("left-right 4x4 blocks", GroupScheme::block(Side::LeftRight, n, n, 4)?),
    ];
    for (name, scheme) in schemes {
        let cfg = OptimizerConfig::new(scheme).with_eps(1e-3);
        let r = minimize_condition(&a, &cfg)?;
        println!(
            "{name:>22}: kF {:.3e} -> {:.3e}, kappa {:.3e} -> {:.3e}, {} steps, {:?}, gap <= {:.1e}",
            r.initial_kf,
            r.final_kf,
            r.initial_kappa,
            r.final_kappa,
            r.steps(),
            r.termination,
            r.certificate.unwrap_or(f64::NAN),
        );
    }

    // the preconditioner itself: B = X A Y⁻¹
    let cfg = OptimizerConfig::new(GroupScheme::diagonal(Side::LeftRight, n, n));
    let r = minimize_condition(&a, &cfg)?;
    let b = r.final_element.apply(&a)?;
    let x: Vec<f64> = r.final_element.x().diagonal().iter().map(|v| v.re).collect();
    println!("left scaling: {:?}", x.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
    println!("kappa(XAY^-1) = {:.3}", condition_euclidean(&b)?);
    Ok(())
}
