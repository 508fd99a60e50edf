//! Variable scaling by a torus for a sparse system whose root has
//! coordinates of very different magnitudes.

use geoprec::group::{BlockPartition, GroupScheme};
use geoprec::matrix::C64;
use geoprec::optimizer::OptimizerConfig;
use geoprec::polysys::{
    local_condition, minimize_h, precondition_sparse, NormKind, Polynomial, PolynomialSystem,
};

fn main() -> geoprec::Result<()> {
    let xi = [C64::new(50.0, 0.0), C64::new(1.0, 0.0), C64::new(0.02, 0.0)];
    // x1 + x2 x3 + 2 x1 x3, x2 − x1 x3, 3 x3 + x1 x2 x3, each shifted to vanish at xi
    let raw = [
        Polynomial::from_real(3, &[(&[1, 0, 0], 1.0), (&[0, 1, 1], 1.0), (&[1, 0, 1], 2.0)]),
        Polynomial::from_real(3, &[(&[0, 1, 0], 1.0), (&[1, 0, 1], -1.0)]),
        Polynomial::from_real(3, &[(&[0, 0, 1], 3.0), (&[1, 1, 1], 1.0)]),
    ];
    let polys = raw
        .iter()
        .map(|p| p.add(&Polynomial::constant(3, -p.eval(&xi))))
        .collect();
    let f = PolynomialSystem::from_polys(3, polys)?;
    println!("mu_F(f, xi) = {:.4e}", local_condition(&f, &xi, NormKind::Frobenius)?);

    let t = minimize_h(&xi, 1e-12, 10_000)?;
    let balanced: Vec<f64> = xi.iter().zip(t.as_slice()).map(|(x, t)| x.norm() / t).collect();
    println!("minimizer of h alone balances |xi|/t: {balanced:.4?}");

    let cfg = OptimizerConfig::new(GroupScheme::left_only(BlockPartition::full(3), 3)).with_max_iters(400);
    let (_, t, r) = precondition_sparse(&f, &xi, &cfg)?;
    println!("torus t = {:.4?}", t.as_slice());
    println!(
        "mu_F {:.4e} -> {:.4e} in {} steps ({:?})",
        r.initial_kf,
        r.final_kf,
        r.steps(),
        r.termination
    );
    Ok(())
}
