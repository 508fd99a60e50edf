mod common;

use common::*;
use geoprec::group::{BlockPartition, GroupScheme, Side};
use geoprec::matrix::{condition_frobenius, ComplexMatrix};
use geoprec::optimizer::{minimize_condition, OptimizerConfig, Termination};

/// Optimal left-diagonal `κ_F` of a full-row-rank `A`: with `r_i` the row
/// norms² of `A` and `c_i` the column norms² of `A†`, Cauchy–Schwarz gives
/// `min_d (Σ e^{2d_i} r_i)(Σ e^{-2d_i} c_i) = (Σ √(r_i c_i))²`.
fn left_diagonal_optimum(a: &ComplexMatrix) -> f64 {
    let d = a.to_dense();
    let p = d.clone().pseudo_inverse(1e-14).unwrap();
    (0..d.nrows())
        .map(|i| (d.row(i).norm_squared() * p.column(i).norm_squared()).sqrt())
        .sum()
}

#[test]
fn left_diagonal_matches_closed_form() {
    for seed in 0..12u64 {
        let m = 2 + (seed % 5) as usize;
        let n = m + (seed % 3) as usize;
        let a = gaussian(900 + seed, m, n);
        let star = left_diagonal_optimum(&a);
        let cfg = OptimizerConfig::new(GroupScheme::diagonal(Side::LeftOnly, m, n)).with_eps(1e-6);
        let r = minimize_condition(&a, &cfg).unwrap();
        assert_eq!(r.termination, Termination::Certified);
        let gap = (r.final_kf / star).ln();
        assert!(gap >= -1e-12, "seed {seed}: below the optimum ({gap})");
        assert!(gap <= r.certificate.unwrap() + 1e-12, "seed {seed}: gap {gap}");
    }
}

#[test]
fn closed_form_agrees_with_grid_search() {
    let a = gaussian(7, 2, 2);
    let d = a.to_dense();
    let star = left_diagonal_optimum(&a);
    // one free log-scaling: the overall scale does not change κ_F
    let best = (-4000..=4000)
        .map(|k| {
            let s = (k as f64 * 1e-3).exp();
            let mut b = d.clone();
            b.row_mut(0).scale_mut(s);
            condition_frobenius(&ComplexMatrix::from_dense(b)).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best >= star - 1e-12 && best <= star * (1.0 + 1e-6), "{best} vs {star}");
}

#[test]
fn block_schemes_never_lose_to_diagonal() {
    for seed in 0..6u64 {
        let a = gaussian(950 + seed, 6, 6).scale_rows_cols(
            &(0..6).map(|i| c(4f64.powi(i))).collect::<Vec<_>>(),
            &[c(1.0); 6],
        );
        let run = |scheme| minimize_condition(&a, &OptimizerConfig::new(scheme).with_eps(1e-4)).unwrap();
        let diag = run(GroupScheme::diagonal(Side::LeftOnly, 6, 6));
        let block = run(GroupScheme::left_only(BlockPartition::uniform(6, 2).unwrap(), 6));
        // the block optimum lies below the diagonal one; both runs are certified
        assert!(block.final_kf <= diag.final_kf * 1e-4f64.exp(), "seed {seed}");
    }
}

#[test]
fn full_left_scheme_reaches_perfect_conditioning() {
    // with X ranging over all of GL(m), XA can be made to have orthonormal rows
    let a = gaussian(990, 4, 7);
    let cfg = OptimizerConfig::new(GroupScheme::left_only(BlockPartition::full(4), 7)).with_eps(1e-8);
    let r = minimize_condition(&a, &cfg).unwrap();
    assert!((r.final_kf - 4.0).abs() < 1e-6, "{}", r.final_kf);
}
