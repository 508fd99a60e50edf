use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::rng::{complex_gaussian_matrix, substream};

type Map<'a> = Box<dyn Fn(&DVector<C64>) -> DVector<C64> + Send + Sync + 'a>;

/// Matrix-free `m × n` operator given by `v ↦ Av` and `w ↦ A*w`. Every call
/// to either map increments a shared counter.
pub struct LinearOperator<'a> {
    m: usize,
    n: usize,
    matvec: Map<'a>,
    rmatvec: Map<'a>,
    count: AtomicUsize,
}

impl<'a> LinearOperator<'a> {
    /// Build from closures and check `⟨Av, w⟩ = ⟨v, A*w⟩` on a random pair.
    pub fn new(
        m: usize,
        n: usize,
        matvec: impl Fn(&DVector<C64>) -> DVector<C64> + Send + Sync + 'a,
        rmatvec: impl Fn(&DVector<C64>) -> DVector<C64> + Send + Sync + 'a,
    ) -> Result<Self> {
        let op = Self::new_unchecked(m, n, matvec, rmatvec);
        op.check_adjoint()?;
        Ok(op)
    }

    pub(crate) fn new_unchecked(
        m: usize,
        n: usize,
        matvec: impl Fn(&DVector<C64>) -> DVector<C64> + Send + Sync + 'a,
        rmatvec: impl Fn(&DVector<C64>) -> DVector<C64> + Send + Sync + 'a,
    ) -> Self {
        LinearOperator {
            m,
            n,
            matvec: Box::new(matvec),
            rmatvec: Box::new(rmatvec),
            count: AtomicUsize::new(0),
        }
    }

    pub fn from_matrix(a: &'a ComplexMatrix) -> Self {
        Self::new_unchecked(
            a.nrows(),
            a.ncols(),
            move |v| a.matvec(v),
            move |w| a.adjoint_matvec(w),
        )
    }

    pub fn from_dense(a: &'a DMatrix<C64>) -> Self {
        Self::new_unchecked(a.nrows(), a.ncols(), move |v| a * v, move |w| a.ad_mul(w))
    }

    pub fn nrows(&self) -> usize {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, v: &DVector<C64>) -> DVector<C64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        (self.matvec)(v)
    }

    pub fn rmatvec(&self, w: &DVector<C64>) -> DVector<C64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        (self.rmatvec)(w)
    }

    /// Products with `A` or `A*` since construction or the last reset.
    pub fn matvec_count(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    /// Relative adjoint defect on a fixed random probe pair. Does not touch
    /// the counter.
    pub fn adjoint_defect(&self) -> f64 {
        let mut rng = substream(0x5eed, 0);
        let v = complex_gaussian_matrix(&mut rng, self.n, 1).column(0).into_owned();
        let w = complex_gaussian_matrix(&mut rng, self.m, 1).column(0).into_owned();
        let av = (self.matvec)(&v);
        let aw = (self.rmatvec)(&w);
        let lhs = w.dotc(&av);
        let rhs = aw.dotc(&v);
        let scale = av.norm() * w.norm() + v.norm() * aw.norm();
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).norm() / scale
        }
    }

    pub fn check_adjoint(&self) -> Result<()> {
        let d = self.adjoint_defect();
        if d > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matvec and rmatvec are not adjoint (relative defect {d:e})"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Debug for LinearOperator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearOperator")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("matvec_count", &self.matvec_count())
            .finish()
    }
}
