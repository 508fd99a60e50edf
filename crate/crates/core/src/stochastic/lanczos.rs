use std::ops::Range;

use nalgebra::DMatrix;

use super::operator::LinearOperator;
use crate::error::{Error, Result};
use crate::matrix::{c, hermitian_function, C64, ONE};

/// Apply `M` to every column of `q`.
fn apply_block(m: &LinearOperator<'_>, q: &DMatrix<C64>) -> DMatrix<C64> {
    let cols: Vec<_> = (0..q.ncols())
        .map(|j| m.matvec(&q.column(j).into_owned()))
        .collect();
    DMatrix::from_columns(&cols)
}

/// Block Lanczos quadrature for the diagonal block `(M⁻¹)[block, block]` of a
/// Hermitian positive definite `M`, started from the coordinate vectors of
/// `block`. Uses full reorthogonalization. When the Krylov space becomes
/// invariant the result is exact and the iteration stops early.
pub fn block_lanczos_inverse_block(
    m: &LinearOperator<'_>,
    block: Range<usize>,
    iters: usize,
) -> Result<DMatrix<C64>> {
    let n = m.ncols();
    let r = block.len();
    if m.nrows() != n || r == 0 || block.end > n {
        return Err(Error::dims("block must be a nonempty range inside a square operator"));
    }
    if iters == 0 {
        return Err(Error::InvalidArgument("at least one Lanczos iteration is required".into()));
    }
    let mut q = DMatrix::zeros(n, r);
    for (k, i) in block.clone().enumerate() {
        q[(i, k)] = ONE;
    }
    let mut basis: Vec<DMatrix<C64>> = vec![q];
    let mut alphas: Vec<DMatrix<C64>> = Vec::new();
    let mut betas: Vec<DMatrix<C64>> = Vec::new();
    let mut scale: f64 = 0.0;

    for j in 0..iters {
        let qj = &basis[j];
        let mut w = apply_block(m, qj);
        let a = qj.adjoint() * &w;
        let a = (&a + a.adjoint()) * c(0.5);
        scale = scale.max(a.norm());
        w -= qj * &a;
        if j > 0 {
            w -= &basis[j - 1] * betas[j - 1].adjoint();
        }
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for qk in &basis {
                let coef = qk.adjoint() * &w;
                w -= qk * coef;
            }
        }
        alphas.push(a);
        if j + 1 == iters || basis.len() * r >= n {
            break;
        }
        let qr = w.clone().qr();
        let rmat = qr.r();
        let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
        let lost = (0..r).filter(|&i| rmat[(i, i)].norm() <= tol).count();
        if lost == r {
            break;
        }
        if lost > 0 {
            return Err(Error::BreakdownAtIteration(j + 1));
        }
        betas.push(rmat);
        basis.push(qr.q());
    }

    let k = alphas.len();
    let mut t = DMatrix::zeros(k * r, k * r);
    for (i, a) in alphas.iter().enumerate() {
        t.view_mut((i * r, i * r), (r, r)).copy_from(a);
    }
    for (i, b) in betas.iter().enumerate().take(k - 1) {
        t.view_mut(((i + 1) * r, i * r), (r, r)).copy_from(b);
        t.view_mut((i * r, (i + 1) * r), (r, r)).copy_from(&b.adjoint());
    }
    let tinv = hermitian_function(&t, |l| 1.0 / l);
    let top = tinv.view((0, 0), (r, r)).into_owned();
    Ok((&top + top.adjoint()) * c(0.5))
}
