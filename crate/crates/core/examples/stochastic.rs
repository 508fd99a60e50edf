//! Matrix-free preconditioning of a large sparse matrix. Gradients come from
//! Hutchinson probes with conjugate-gradient solves; only products with A
//! and A* are used.

use geoprec::group::{GroupScheme, Side};
use geoprec::matrix::{ComplexMatrix, C64};
use geoprec::optimizer::OptimizerConfig;
use geoprec::rng::substream;
use geoprec::stochastic::{minimize_condition_stochastic, EstimatorConfig};
use rand::Rng;

fn main() -> geoprec::Result<()> {
    let n = 150;
    let mut rng = substream(3, 0);
    let mut triplets = Vec::new();
    for i in 0..n {
        let scale = 10f64.powf(rng.random_range(-1.0..1.0));
        triplets.push((i, i, C64::new(4.0 * scale, 0.0)));
        for _ in 0..5 {
            triplets.push((i, rng.random_range(0..n), C64::new(scale * rng.random_range(-1.0..1.0), 0.0)));
        }
    }
    let a = ComplexMatrix::from_triplets(n, n, triplets)?;
    println!("{n}x{n}, {} nonzeros", a.nnz());

    let cfg = OptimizerConfig::new(GroupScheme::diagonal(Side::LeftOnly, n, n)).with_max_iters(150);
    let est = EstimatorConfig {
        num_probes: 64,
        seed: 11,
        cg_max_iters: 5000,
        ..Default::default()
    };
    // exact_summary computes the true kF at both ends for comparison
    let r = minimize_condition_stochastic(&a, &cfg, &est, true)?;
    for it in r.iterations.iter().step_by(25) {
        println!("iter {:3}  estimated log kF {:.4}  |grad| {:.3e}", it.iter, it.value, it.grad_norm);
    }
    println!("exact kF {:.3e} -> {:.3e} ({:?})", r.initial_kf, r.final_kf, r.termination);
    Ok(())
}
