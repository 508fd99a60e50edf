//! Equation shuffling and linear changes of variables for a polynomial
//! system at a point.

use geoprec::group::{BlockPartition, GroupScheme};
use geoprec::matrix::C64;
use geoprec::polysys::{
    inverse_jacobian_scaling, local_condition, precondition_full, precondition_shuffle, shuffle,
    NormKind, Polynomial, PolynomialSystem,
};
use geoprec::optimizer::OptimizerConfig;

fn main() -> geoprec::Result<()> {
    // f1 = x² + x + y, f2 = y² + x − y, at the origin
    let f1 = Polynomial::from_real(2, &[(&[2, 0], 1.0), (&[1, 0], 1.0), (&[0, 1], 1.0)]);
    let f2 = Polynomial::from_real(2, &[(&[0, 2], 1.0), (&[1, 0], 1.0), (&[0, 1], -1.0)]);
    let f = PolynomialSystem::from_polys(2, vec![f1, f2])?;
    let xi = [C64::new(0.0, 0.0); 2];
    let ijs = inverse_jacobian_scaling(&f, &xi)?;
    println!("mu(f)     = {:.6}", local_condition(&f, &xi, NormKind::Operator)?);
    println!("mu_F(f)   = {:.6}", local_condition(&f, &xi, NormKind::Frobenius)?);
    println!("mu_F(IJS) = {:.6}", local_condition(&ijs, &xi, NormKind::Frobenius)?);

    // a badly scaled variant: multiply the equations by 100 and 0.01
    let g = PolynomialSystem::from_polys(
        2,
        vec![f.polys()[0].scale(C64::new(100.0, 0.0)), f.polys()[1].scale(C64::new(0.01, 0.0))],
    )?;
    let cfg = OptimizerConfig::new(GroupScheme::left_only(BlockPartition::full(2), 2)).with_eps(1e-6);
    let (x, r) = precondition_shuffle(&g, &xi, &cfg)?;
    let shuffled = shuffle(x.x(), &g)?;
    println!(
        "shuffle:   mu_F {:.4e} -> {:.6} in {} steps",
        r.initial_kf,
        local_condition(&shuffled, &xi, NormKind::Frobenius)?,
        r.steps()
    );

    // shuffling and change of variables together
    let cfg = OptimizerConfig::new(GroupScheme::left_right(BlockPartition::full(2), BlockPartition::full(2)))
        .with_eps(1e-6)
        .with_max_iters(300);
    let (_, r) = precondition_full(&g, &xi, &cfg)?;
    println!("full:      mu_F {:.4e} -> {:.6} ({:?})", r.initial_kf, r.final_kf, r.termination);
    Ok(())
}
