use nalgebra::DMatrix;

use super::poly::{evaluate_system, Monomial, Polynomial, PolynomialSystem};
use crate::error::{Error, Result};
use crate::matrix::{c, hermitian_function, C64, ZERO};

/// Default cap on the number of terms produced by a change of variables.
pub const EXPANSION_CAP: usize = 1_000_000;

/// `g_i = Σ_j X_ij f_j`. The degree of `g_i` is bounded by the largest
/// declared degree among the `f_j` it mixes.
pub fn shuffle(x: &DMatrix<C64>, f: &PolynomialSystem) -> Result<PolynomialSystem> {
    let m = f.len();
    if x.shape() != (m, m) {
        return Err(Error::dims(format!(
            "shuffle matrix must be {m}x{m}, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let mut polys = Vec::with_capacity(m);
    let mut degrees = Vec::with_capacity(m);
    for i in 0..m {
        let mut p = Polynomial::zero(f.nvars());
        let mut d = 0;
        for j in 0..m {
            if x[(i, j)] != ZERO {
                p.add_scaled(&f.polys()[j], x[(i, j)]);
                d = d.max(f.degrees()[j]);
            }
        }
        polys.push(p);
        degrees.push(d.max(1));
    }
    PolynomialSystem::new(f.nvars(), polys, degrees)
}

/// `f(Mx)` by expanding every monomial in the linear forms `(Mx)_k`.
pub fn substitute_linear(
    f: &PolynomialSystem,
    m: &DMatrix<C64>,
    cap: usize,
) -> Result<PolynomialSystem> {
    let n = f.nvars();
    if m.shape() != (n, n) {
        return Err(Error::dims(format!("substitution matrix must be {n}x{n}")));
    }
    let forms: Vec<Polynomial> = (0..n)
        .map(|k| {
            Polynomial::from_terms(
                n,
                (0..n).map(|l| {
                    let mut e = vec![0; n];
                    e[l] = 1;
                    (e, m[(k, l)])
                }),
            )
        })
        .collect();
    // powers[k][e] = (Mx)_k^e, grown on demand
    let mut powers: Vec<Vec<Polynomial>> =
        (0..n).map(|_| vec![Polynomial::constant(n, c(1.0))]).collect();
    let mut polys = Vec::with_capacity(f.len());
    for p in f.polys() {
        let mut out = Polynomial::zero(n);
        for (mono, coef) in p.terms() {
            let mut term = Polynomial::constant(n, *coef);
            for (k, &a) in mono.0.iter().enumerate() {
                while powers[k].len() <= a as usize {
                    let next = powers[k].last().unwrap().mul(&forms[k]);
                    powers[k].push(next);
                }
                if a > 0 {
                    term = term.mul(&powers[k][a as usize]);
                }
                if term.num_terms() > cap {
                    return Err(Error::ExpansionOverflow {
                        terms: term.num_terms(),
                        cap,
                    });
                }
            }
            out.add_scaled(&term, c(1.0));
            if out.num_terms() > cap {
                return Err(Error::ExpansionOverflow {
                    terms: out.num_terms(),
                    cap,
                });
            }
        }
        polys.push(out);
    }
    Ok(f.with_polys(polys))
}

/// `f ↦ f ∘ Y⁻¹`, so that a root `ξ` of `f` becomes the root `Yξ`.
pub fn change_variables(y: &DMatrix<C64>, f: &PolynomialSystem) -> Result<PolynomialSystem> {
    change_variables_capped(y, f, EXPANSION_CAP)
}

pub fn change_variables_capped(
    y: &DMatrix<C64>,
    f: &PolynomialSystem,
    cap: usize,
) -> Result<PolynomialSystem> {
    let n = f.nvars();
    if y.shape() != (n, n) {
        return Err(Error::dims(format!("change of variables must be {n}x{n}")));
    }
    let yinv = y
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBlock { block: 0 })?;
    substitute_linear(f, &yinv, cap)
}

/// `(X, Y)·f = X·(f ∘ Y⁻¹)`.
pub fn act(
    x: &DMatrix<C64>,
    y: &DMatrix<C64>,
    f: &PolynomialSystem,
) -> Result<PolynomialSystem> {
    shuffle(x, &change_variables(y, f)?)
}

/// Hermitian square root `S_f` of the Gram matrix `G_ij = ⟨f_i, f_j⟩`, so
/// that `‖X S_f‖_F = ‖X·f‖_W` for every `X`.
pub fn gram_sqrt(f: &PolynomialSystem) -> DMatrix<C64> {
    hermitian_function(&f.gram(), |l| l.max(0.0).sqrt())
}

/// Infinitesimal action `(Π(H)f)_i = Σ_j H1_ij f_j − Σ_{k,l} H2_kl x_l ∂_k f_i`.
pub fn lie_derivative(
    f: &PolynomialSystem,
    h1: &DMatrix<C64>,
    h2: &DMatrix<C64>,
) -> Result<PolynomialSystem> {
    let (m, n) = (f.len(), f.nvars());
    if h1.shape() != (m, m) || h2.shape() != (n, n) {
        return Err(Error::dims(format!(
            "generators must be {m}x{m} and {n}x{n}"
        )));
    }
    let mut polys = Vec::with_capacity(m);
    for i in 0..m {
        let mut p = Polynomial::zero(n);
        for j in 0..m {
            if h1[(i, j)] != ZERO {
                p.add_scaled(&f.polys()[j], h1[(i, j)]);
            }
        }
        for k in 0..n {
            for l in 0..n {
                if h2[(k, l)] != ZERO {
                    p.add_scaled(&f.polys()[i].euler_term(l, k), -h2[(k, l)]);
                }
            }
        }
        polys.push(p);
    }
    Ok(f.with_polys(polys))
}

/// The inverse Jacobian shuffle `D_ξ(f)⁻¹ · f` for square systems.
pub fn inverse_jacobian_scaling(f: &PolynomialSystem, xi: &[C64]) -> Result<PolynomialSystem> {
    let jac = evaluate_system(f, xi)?.jacobian.to_dense();
    if jac.nrows() != jac.ncols() {
        return Err(Error::dims("inverse Jacobian scaling needs a square system"));
    }
    let inv = jac.try_inverse().ok_or(Error::ZeroJacobian)?;
    shuffle(&inv, f)
}

/// Support of every polynomial, for sparsity checks.
pub fn supports(f: &PolynomialSystem) -> Vec<Vec<Monomial>> {
    f.polys().iter().map(Polynomial::support).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::poly::{bw_inner, bw_norm_system, NormKind};
    use crate::polysys::test_support::{example2, random_system};
    use crate::rng::{complex_gaussian_matrix, random_unitary, substream};

    #[test]
    fn shuffle_examples() {
        let f = example2();
        assert_eq!(shuffle(&DMatrix::identity(2, 2), &f).unwrap(), f);
        let g = inverse_jacobian_scaling(&f, &[c(0.0), c(0.0)]).unwrap();
        let want1 = Polynomial::from_real(2, &[(&[2, 0], 0.5), (&[0, 2], 0.5), (&[1, 0], 1.0)]);
        let want2 = Polynomial::from_real(2, &[(&[2, 0], 0.5), (&[0, 2], -0.5), (&[0, 1], 1.0)]);
        assert_eq!(g.polys()[0], want1);
        assert_eq!(g.polys()[1], want2);

        let perm = DMatrix::from_row_slice(2, 2, &[ZERO, c(1.0), c(1.0), ZERO]);
        let p = shuffle(&perm, &f).unwrap();
        assert_eq!(p.polys()[0], f.polys()[1]);
        assert_eq!(p.polys()[1], f.polys()[0]);
    }

    #[test]
    fn shuffle_keeps_common_roots() {
        let f = example2();
        let mut rng = substream(1, 0);
        let x = complex_gaussian_matrix(&mut rng, 2, 2);
        let g = shuffle(&x, &f).unwrap();
        let v = evaluate_system(&g, &[c(0.0), c(0.0)]).unwrap().values;
        assert!(v.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn change_variables_examples() {
        let f = example2();
        assert_eq!(change_variables(&DMatrix::identity(2, 2), &f).unwrap(), f);
        let x2 = PolynomialSystem::from_polys(1, vec![Polynomial::from_real(1, &[(&[2], 1.0)])])
            .unwrap();
        let g = change_variables(&DMatrix::from_element(1, 1, c(2.0)), &x2).unwrap();
        assert_eq!(g.polys()[0], Polynomial::from_real(1, &[(&[2], 0.25)]));
    }

    #[test]
    fn jacobian_transforms_contragrediently() {
        let mut rng = substream(2, 0);
        let f = random_system(&mut rng, 3, 3, 3);
        let xi: Vec<C64> = complex_gaussian_matrix(&mut rng, 3, 1).iter().copied().collect();
        let x = complex_gaussian_matrix(&mut rng, 3, 3);
        let y = complex_gaussian_matrix(&mut rng, 3, 3);
        let g = act(&x, &y, &f).unwrap();
        let yxi: Vec<C64> = (&y * nalgebra::DVector::from_column_slice(&xi)).iter().copied().collect();
        let lhs = evaluate_system(&g, &yxi).unwrap().jacobian.to_dense();
        let d = evaluate_system(&f, &xi).unwrap().jacobian.to_dense();
        let rhs = &x * d * y.clone().try_inverse().unwrap();
        assert!((lhs - &rhs).norm() <= 1e-8 * rhs.norm());
    }

    #[test]
    fn expansion_cap() {
        let f = PolynomialSystem::from_polys(
            3,
            vec![Polynomial::from_real(3, &[(&[6, 0, 0], 1.0)])],
        )
        .unwrap();
        let y = DMatrix::from_fn(3, 3, |i, j| c(if i == j { 2.0 } else { 0.3 }));
        assert!(matches!(
            change_variables_capped(&y, &f, 5),
            Err(Error::ExpansionOverflow { cap: 5, .. })
        ));
        assert!(change_variables_capped(&y, &f, 1000).is_ok());
    }

    #[test]
    fn gram_sqrt_examples() {
        let f = PolynomialSystem::from_polys(2, vec![Polynomial::var(2, 0), Polynomial::var(2, 1)])
            .unwrap();
        assert!((gram_sqrt(&f) - DMatrix::<C64>::identity(2, 2)).norm() < 1e-14);

        let g = PolynomialSystem::from_polys(2, vec![Polynomial::var(2, 0), Polynomial::var(2, 0)])
            .unwrap();
        let s = gram_sqrt(&g);
        let want = DMatrix::from_element(2, 2, c(1.0 / 2f64.sqrt()));
        assert!((s - want).norm() < 1e-12);

        let mut rng = substream(3, 0);
        let h = random_system(&mut rng, 3, 2, 3);
        let s = gram_sqrt(&h);
        assert!((s.norm() - bw_norm_system(&h)).abs() < 1e-10);
        let x = complex_gaussian_matrix(&mut rng, 3, 3);
        let lhs = (&x * &s).norm();
        let rhs = bw_norm_system(&shuffle(&x, &h).unwrap());
        assert!((lhs - rhs).abs() < 1e-9 * rhs);
    }

    #[test]
    fn unitary_change_preserves_norm() {
        let mut rng = substream(4, 0);
        for _ in 0..5 {
            let f = random_system(&mut rng, 2, 3, 4);
            let u = random_unitary(&mut rng, 3);
            let g = change_variables(&u, &f).unwrap();
            assert!((bw_norm_system(&g) - bw_norm_system(&f)).abs() < 1e-9 * bw_norm_system(&f));
            for (p, q) in f.polys().iter().zip(g.polys()) {
                assert!((bw_inner(p, p).re - bw_inner(q, q).re).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unitary_invariance_of_mu() {
        let mut rng = substream(5, 0);
        let f = random_system(&mut rng, 3, 3, 2);
        let xi: Vec<C64> = complex_gaussian_matrix(&mut rng, 3, 1).iter().copied().collect();
        let u1 = random_unitary(&mut rng, 3);
        let u2 = random_unitary(&mut rng, 3);
        let g = act(&u1, &u2, &f).unwrap();
        let u2xi: Vec<C64> = (&u2 * nalgebra::DVector::from_column_slice(&xi)).iter().copied().collect();
        for kind in [NormKind::Frobenius, NormKind::Operator] {
            let a = crate::polysys::local_condition(&f, &xi, kind).unwrap();
            let b = crate::polysys::local_condition(&g, &u2xi, kind).unwrap();
            assert!((a - b).abs() < 1e-8 * a);
        }
    }

    #[test]
    fn lie_derivative_examples() {
        let f = example2();
        let i2 = DMatrix::<C64>::identity(2, 2);
        let z2 = DMatrix::<C64>::zeros(2, 2);
        assert_eq!(lie_derivative(&f, &i2, &z2).unwrap(), f);

        let x2 = PolynomialSystem::from_polys(1, vec![Polynomial::from_real(1, &[(&[2], 1.0)])])
            .unwrap();
        let d = lie_derivative(&x2, &DMatrix::zeros(1, 1), &DMatrix::identity(1, 1)).unwrap();
        assert_eq!(d.polys()[0], Polynomial::from_real(1, &[(&[2], -2.0)]));
    }

    #[test]
    fn lie_derivative_matches_finite_differences() {
        let mut rng = substream(6, 0);
        let f = random_system(&mut rng, 2, 2, 3);
        let s = crate::group::GroupScheme::left_right(
            crate::group::BlockPartition::full(2),
            crate::group::BlockPartition::full(2),
        );
        let h = crate::group::LieDirection::random(&s, &mut rng);
        let d = lie_derivative(&f, h.h1(), h.h2()).unwrap();
        let t = 1e-6;
        let at = |t: f64| {
            let e1 = hermitian_function(h.h1(), |l| (t * l).exp());
            let e2 = hermitian_function(h.h2(), |l| (t * l).exp());
            act(&e1, &e2, &f).unwrap()
        };
        let (fp, fm) = (at(t), at(-t));
        for i in 0..2 {
            let fd = fp.polys()[i].add(&fm.polys()[i].scale(c(-1.0))).scale(c(0.5 / t));
            let diff = fd.add(&d.polys()[i].scale(c(-1.0)));
            let err = diff.terms().map(|(_, v)| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-6, "{err}");
        }
    }
}
