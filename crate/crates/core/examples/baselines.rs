//! Heuristic scalings next to the optimized one, on a small worked matrix.

use geoprec::group::{GroupScheme, Side};
use geoprec::matrix::{
    condition_euclidean, condition_frobenius, condition_skeel, jacobi_precondition, row_balance_l2,
    sinkhorn_equilibrate, ComplexMatrix, JacobiMode,
};
use geoprec::optimizer::{minimize_condition, OptimizerConfig};

fn report(name: &str, a: &ComplexMatrix) -> geoprec::Result<()> {
    println!(
        "{name:>22}: kappa {:8.4}  kF {:8.4}  Skeel {:8.4}",
        condition_euclidean(a)?,
        condition_frobenius(a)?,
        condition_skeel(a)?
    );
    Ok(())
}

fn main() -> geoprec::Result<()> {
    let a = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 3.0, 1.0]]);
    report("original", &a)?;
    report("Jacobi (left)", &jacobi_precondition(&a, JacobiMode::Left)?)?;
    report("Jacobi (two-sided)", &jacobi_precondition(&a, JacobiMode::TwoSided)?)?;
    report("row balancing", &row_balance_l2(&a)?)?;
    report("Sinkhorn", &sinkhorn_equilibrate(&a, 1000, 1e-12)?.apply(&a))?;

    for (name, side) in [("optimized (left)", Side::LeftOnly), ("optimized (left-right)", Side::LeftRight)] {
        let cfg = OptimizerConfig::new(GroupScheme::diagonal(side, 3, 3)).with_eps(1e-6);
        let r = minimize_condition(&a, &cfg)?;
        report(name, &r.final_element.apply(&a)?)?;
    }
    Ok(())
}
