//! The log-condition objective `C_A(g) = log κ_F(g·A)` on `G/K`, its
//! Riemannian gradient and Hessian, and the duality certificate.
//!
//! Both the exact objective (`C = B†`) and the cross objective
//! `log ‖XAY⁻¹‖_F + log ‖YBX⁻¹‖_F` share one state type: the second factor is
//! carried as `C` in either case.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::group::{project_to_lie, GroupElement, GroupScheme, LieDirection, WeightData};
use crate::matrix::{c, re_inner, svd_dense, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// `log κ_F(B)` with `C = B†`.
    Condition,
    /// `log ‖B‖_F ‖C‖_F` with `C` transformed contragrediently.
    Cross,
}

#[derive(Clone, Debug)]
pub struct ObjectiveState {
    pub kind: ObjectiveKind,
    pub g: GroupElement,
    /// `X A Y⁻¹`
    pub b: DMatrix<C64>,
    /// `B†` or `Y B₀ X⁻¹`
    pub c: DMatrix<C64>,
    pub value: f64,
    pub grad: LieDirection,
    pub grad_norm: f64,
    /// Singular values of `B`, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Numerical rank of `B` is below `min(m, n)`.
    pub rank_deficient: bool,
}

impl ObjectiveState {
    /// `κ_F(B)`, or the cross condition number.
    pub fn kf(&self) -> f64 {
        self.value.exp()
    }

    /// Euclidean condition number of `B`.
    pub fn kappa(&self) -> f64 {
        let s = &self.singular_values;
        let tol = crate::matrix::default_rcond(self.b.nrows(), self.b.ncols()) * s[0];
        let lo = s.iter().rev().find(|&&v| v > tol).copied().unwrap_or(0.0);
        s[0] / lo
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.rank_deficient {
            let tol = crate::matrix::default_rcond(self.b.nrows(), self.b.ncols())
                * self.singular_values[0];
            let rank = self.singular_values.iter().filter(|&&s| s > tol).count();
            return Err(Error::RankDeficient {
                rank,
                expected: self.b.nrows().min(self.b.ncols()),
            });
        }
        Ok(())
    }
}

/// Gradient of `log ‖B‖ + log ‖C‖` under `B ↦ XBY⁻¹`, `C ↦ YCX⁻¹`:
/// `proj(BB*/‖B‖² − C*C/‖C‖², −B*B/‖B‖² + CC*/‖C‖²)`.
fn gradient_of(g: &GroupElement, b: &DMatrix<C64>, cm: &DMatrix<C64>) -> Result<LieDirection> {
    let nb = b.norm_squared();
    let nc = cm.norm_squared();
    let m1 = b * b.adjoint() * c(1.0 / nb) - cm.adjoint() * cm * c(1.0 / nc);
    let m2 = if g.scheme().is_left_only() {
        DMatrix::zeros(0, 0)
    } else {
        cm * cm.adjoint() * c(1.0 / nc) - b.adjoint() * b * c(1.0 / nb)
    };
    project_to_lie(g.scheme(), &m1, &m2)
}

/// Evaluate `log κ_F(g·A)`. Rank-deficient inputs are evaluated through the
/// pseudoinverse and flagged.
pub fn evaluate(a: &ComplexMatrix, g: &GroupElement) -> Result<ObjectiveState> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let b = g.apply(a)?.to_dense();
    let f = svd_dense(&b, None);
    let rank = f.rank();
    let cm = f.pseudoinverse();
    let value = b.norm().ln() + cm.norm().ln();
    let grad = gradient_of(g, &b, &cm)?;
    Ok(ObjectiveState {
        kind: ObjectiveKind::Condition,
        g: g.clone(),
        grad_norm: grad.norm(),
        grad,
        value,
        rank_deficient: rank < b.nrows().min(b.ncols()),
        singular_values: f.singular_values,
        b,
        c: cm,
    })
}

/// Evaluate the cross objective `log ‖XAY⁻¹‖_F + log ‖YBX⁻¹‖_F`.
///
/// For left-only schemes `Y = I`, so `A` may be `m × p` and `B` any `q × m`.
pub fn evaluate_cross(
    a: &ComplexMatrix,
    b0: &ComplexMatrix,
    g: &GroupElement,
) -> Result<ObjectiveState> {
    if a.is_zero() || b0.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let scheme = g.scheme();
    if a.nrows() != scheme.m() || b0.ncols() != scheme.m() {
        return Err(Error::dims(format!(
            "cross objective needs A with {0} rows and B with {0} columns",
            scheme.m()
        )));
    }
    let b = if scheme.is_left_only() {
        g.x() * a.dense().as_ref()
    } else {
        scheme.check_matrix(a)?;
        g.apply(a)?.to_dense()
    };
    let cm = if scheme.is_left_only() {
        b0.dense().as_ref() * g.x_inverse()?
    } else {
        g.apply_contragredient(&b0.dense())?
    };
    let f = svd_dense(&b, None);
    let value = b.norm().ln() + cm.norm().ln();
    let grad = gradient_of(g, &b, &cm)?;
    Ok(ObjectiveState {
        kind: ObjectiveKind::Cross,
        g: g.clone(),
        grad_norm: grad.norm(),
        grad,
        value,
        rank_deficient: f.rank() < b.nrows().min(b.ncols()),
        singular_values: f.singular_values,
        b,
        c: cm,
    })
}

pub fn gradient(state: &ObjectiveState) -> &LieDirection {
    &state.grad
}

/// Whether `(XAY⁻¹)† = Y A† X⁻¹` for every group element: square `A`, or a
/// left-only action on wide `A`. Only then is `log κ_F(XAY⁻¹)` a Kempf–Ness
/// function, hence convex and covered by the duality certificate; tall `A`
/// and wide `A` under a left-right action give nonconvex objectives.
pub fn pinv_is_contragredient(scheme: &GroupScheme, m: usize, n: usize) -> bool {
    m == n || (scheme.is_left_only() && m <= n)
}

/// `⟨H, ∇²C H⟩`, the second derivative of `t ↦ C(e^{tH} g)` at `t = 0`.
pub fn hessian_quadratic_form(state: &ObjectiveState, h: &LieDirection) -> Result<f64> {
    if h.scheme() != state.g.scheme() {
        return Err(Error::dims("direction and state belong to different schemes"));
    }
    let (m, n) = state.b.shape();
    let tensor_route = state.kind == ObjectiveKind::Cross || pinv_is_contragredient(h.scheme(), m, n);
    Ok(if tensor_route {
        hessian_tensor(state, h)
    } else {
        hessian_pinv(state, h)
    })
}

/// Kempf–Ness form: with `P = H₁B − BH₂`, `Q = H₂C − CH₁`,
/// `2(‖P‖²/‖B‖² − Re⟨P,B⟩²/‖B‖⁴ + ‖Q‖²/‖C‖² − Re⟨Q,C⟩²/‖C‖⁴)`.
fn hessian_tensor(state: &ObjectiveState, h: &LieDirection) -> f64 {
    let (b, cm) = (&state.b, &state.c);
    let left_only = h.scheme().is_left_only();
    let p = if left_only { h.h1() * b } else { h.h1() * b - b * h.h2() };
    let q = if left_only { -(cm * h.h1()) } else { h.h2() * cm - cm * h.h1() };
    let (nb, nc) = (b.norm_squared(), cm.norm_squared());
    let (a1, a2) = (re_inner(&p, b), re_inner(&q, cm));
    2.0 * (p.norm_squared() / nb - a1 * a1 / (nb * nb) + q.norm_squared() / nc
        - a2 * a2 / (nc * nc))
}

/// Second derivative through `‖B_t†‖² = tr M_t⁻¹` with `M = BB*` (wide) or
/// `B*B` (tall). Exact for any full-rank shape.
fn hessian_pinv(state: &ObjectiveState, h: &LieDirection) -> f64 {
    let b = &state.b;
    let left_only = h.scheme().is_left_only();
    let deriv = |x: &DMatrix<C64>| {
        if left_only {
            h.h1() * x
        } else {
            h.h1() * x - x * h.h2()
        }
    };
    let b1 = deriv(b);
    let b2 = deriv(&b1);

    let u = b.norm_squared();
    let du = 2.0 * re_inner(&b1, b);
    let ddu = 2.0 * b1.norm_squared() + 2.0 * re_inner(&b2, b);
    let psi = 0.5 * (ddu / u - (du / u).powi(2));

    let (mm, dm, ddm) = if b.nrows() <= b.ncols() {
        (
            b * b.adjoint(),
            &b1 * b.adjoint() + b * b1.adjoint(),
            &b2 * b.adjoint() + &b1 * b1.adjoint() * c(2.0) + b * b2.adjoint(),
        )
    } else {
        (
            b.adjoint() * b,
            b1.adjoint() * b + b.adjoint() * &b1,
            b2.adjoint() * b + b1.adjoint() * &b1 * c(2.0) + b.adjoint() * &b2,
        )
    };
    let nm = hermitian_inverse(&mm);
    let ndm = &nm * &dm;
    let s = nm.trace().re;
    let ds = -(&ndm * &nm).trace().re;
    let dds = 2.0 * (&ndm * &ndm * &nm).trace().re - (&nm * &ddm * &nm).trace().re;
    let phi = 0.5 * (dds / s - (ds / s).powi(2));
    psi + phi
}

fn hermitian_inverse(m: &DMatrix<C64>) -> DMatrix<C64> {
    crate::matrix::hermitian_function(m, |l| 1.0 / l)
}

/// Outcome of the duality certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualityBound {
    /// Upper bound on `C(g) − inf C`.
    Bound(f64),
    /// Gradient still too large for the bound to say anything.
    Infeasible,
}

impl DualityBound {
    pub fn value(self) -> Option<f64> {
        match self {
            DualityBound::Bound(v) => Some(v),
            DualityBound::Infeasible => None,
        }
    }

    pub fn min(self, other: DualityBound) -> DualityBound {
        match (self, other) {
            (DualityBound::Bound(a), DualityBound::Bound(b)) => DualityBound::Bound(a.min(b)),
            (DualityBound::Bound(a), _) | (_, DualityBound::Bound(a)) => DualityBound::Bound(a),
            _ => DualityBound::Infeasible,
        }
    }
}

/// `−½ log(1 − ‖∇C‖/γ)` when `‖∇C‖ < γ`.
pub fn duality_bound_from_norm(grad_norm: f64, weights: &WeightData) -> DualityBound {
    let r = grad_norm / weights.weight_margin;
    if r < 1.0 {
        DualityBound::Bound(-0.5 * (-r).ln_1p())
    } else {
        DualityBound::Infeasible
    }
}

pub fn duality_gap_bound(state: &ObjectiveState, weights: &WeightData) -> DualityBound {
    duality_bound_from_norm(state.grad_norm, weights)
}
