use nalgebra::DVector;

use super::operator::LinearOperator;
use crate::error::{Error, Result};
use crate::matrix::{c, C64};

#[derive(Clone, Debug)]
pub struct CgSolution {
    pub x: DVector<C64>,
    pub iterations: usize,
    /// `‖b − Mx‖/‖b‖` from the recurrence.
    pub residual: f64,
}

/// Conjugate gradients for Hermitian positive definite `M`.
pub fn conjugate_gradient(
    m: &LinearOperator<'_>,
    b: &DVector<C64>,
    tol: f64,
    max_iters: usize,
) -> Result<CgSolution> {
    if m.nrows() != m.ncols() || b.len() != m.nrows() {
        return Err(Error::dims("conjugate gradients needs a square operator"));
    }
    cg_with(|v| m.matvec(v), b, tol, max_iters)
}

pub(crate) fn cg_with(
    mut apply: impl FnMut(&DVector<C64>) -> DVector<C64>,
    b: &DVector<C64>,
    tol: f64,
    max_iters: usize,
) -> Result<CgSolution> {
    let bnorm = b.norm();
    let mut x = DVector::zeros(b.len());
    if bnorm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    for k in 1..=max_iters {
        let mp = apply(&p);
        let pmp = p.dotc(&mp).re;
        if !(pmp > 0.0) {
            return Err(Error::NotConverged {
                iterations: k,
                residual: rr.sqrt() / bnorm,
                probe: None,
            });
        }
        let alpha = rr / pmp;
        x.axpy(c(alpha), &p, c(1.0));
        r.axpy(c(-alpha), &mp, c(1.0));
        let rr_new = r.norm_squared();
        let res = rr_new.sqrt() / bnorm;
        if res <= tol {
            return Ok(CgSolution {
                x,
                iterations: k,
                residual: res,
            });
        }
        let beta = rr_new / rr;
        p = &r + &p * c(beta);
        rr = rr_new;
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        residual: rr.sqrt() / bnorm,
        probe: None,
    })
}
