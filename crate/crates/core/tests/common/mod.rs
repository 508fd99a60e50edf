#![allow(dead_code)]

use geoprec::matrix::{ComplexMatrix, C64};
use geoprec::polysys::{monomials_up_to, Polynomial, PolynomialSystem};
use geoprec::rng::{complex_gaussian_matrix, gaussian_matrix, substream};
use nalgebra::DMatrix;
use rand::Rng;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn example1() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 3.0, 1.0]])
}

pub fn example2() -> PolynomialSystem {
    let f1 = Polynomial::from_real(2, &[(&[2, 0], 1.0), (&[1, 0], 1.0), (&[0, 1], 1.0)]);
    let f2 = Polynomial::from_real(2, &[(&[0, 2], 1.0), (&[1, 0], 1.0), (&[0, 1], -1.0)]);
    PolynomialSystem::from_polys(2, vec![f1, f2]).unwrap()
}

pub fn gaussian(seed: u64, m: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_dense(gaussian_matrix(&mut substream(seed, 0), m, n))
}

pub fn complex_gaussian(seed: u64, m: usize, n: usize) -> DMatrix<C64> {
    complex_gaussian_matrix(&mut substream(seed, 1), m, n)
}

/// Sparse `m × n` real matrix with about `per_row` Gaussian entries per row
/// plus 2 on the leading diagonal.
pub fn sparse_full_rank(seed: u64, m: usize, n: usize, per_row: usize) -> ComplexMatrix {
    let mut rng = substream(seed, 2);
    let mut t = Vec::new();
    for i in 0..m {
        if i < n {
            t.push((i, i, c(2.0)));
        }
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            let v: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            t.push((i, j, c(v)));
        }
    }
    ComplexMatrix::from_triplets(m, n, t).unwrap()
}

/// Dense system with complex Gaussian coefficients on every monomial of
/// degree at most `degree`.
pub fn random_system(seed: u64, m: usize, n: usize, degree: u32) -> PolynomialSystem {
    let monos = monomials_up_to(n, degree);
    let mut rng = substream(seed, 3);
    let polys = (0..m)
        .map(|_| {
            let coeffs = complex_gaussian_matrix(&mut rng, monos.len(), 1);
            Polynomial::from_terms(n, monos.iter().map(|e| e.0.clone()).zip(coeffs.iter().copied()))
        })
        .collect();
    PolynomialSystem::new(n, polys, vec![degree; m]).unwrap()
}

/// Sparse square system vanishing at `xi`: one linear term per equation,
/// two random multilinear terms, and a constant.
pub fn sparse_system_with_root(seed: u64, xi: &[C64]) -> PolynomialSystem {
    let mut rng = substream(seed, 4);
    let n = xi.len();
    let polys = (0..n)
        .map(|i| {
            let mut terms = Vec::new();
            let mut e = vec![0; n];
            e[i] = 1;
            terms.push((e, c(rng.random_range(0.5..2.0))));
            for _ in 0..2 {
                let e: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
                terms.push((e, c(rng.random_range(-1.0..1.0))));
            }
            let p = Polynomial::from_terms(n, terms);
            p.add(&Polynomial::constant(n, -p.eval(xi)))
        })
        .collect();
    PolynomialSystem::new(n, polys, vec![n as u32; n]).unwrap()
}

pub fn random_nonzero_point(seed: u64, n: usize) -> Vec<C64> {
    let mut rng = substream(seed, 5);
    (0..n)
        .map(|_| C64::from_polar(rng.random_range(0.1..10.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}
