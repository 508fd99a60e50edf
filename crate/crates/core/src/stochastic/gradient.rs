use nalgebra::{DMatrix, DVector};

use super::hutchinson::{block_diagonal_estimate, with_probe, EstimatorConfig};
use super::operator::LinearOperator;
use super::cg::cg_with;
use crate::error::{Error, Result};
use crate::group::{
    project_to_lie, weight_data, BlockPartition, GroupElement, LieDirection,
};
use crate::matrix::{c, ComplexMatrix, C64, ONE};
use crate::objective::{duality_bound_from_norm, pinv_is_contragredient};
use crate::optimizer::{IterationRecord, OptimizationReport, OptimizerConfig, Termination};

#[derive(Clone, Debug)]
pub struct GradientEstimate {
    pub grad: LieDirection,
    /// Estimate of `log κ_F(B)`.
    pub value: f64,
    /// Exact `‖B‖_F²`.
    pub norm_sq: f64,
    /// Estimate of `‖B†‖_F²` (trace of the left-side estimate).
    pub pinv_norm_sq: f64,
    /// Products with `A` or `A*` used by this call.
    pub matvecs: usize,
}

/// `B = XAY⁻¹` as a matrix-free operator.
#[allow(clippy::type_complexity)]
fn transformed<'a>(
    a: &'a LinearOperator<'a>,
    g: &GroupElement,
) -> Result<(impl Fn(&DVector<C64>) -> DVector<C64> + Sync + 'a, impl Fn(&DVector<C64>) -> DVector<C64> + Sync + 'a)>
{
    let x = g.x().clone();
    let xa = x.adjoint();
    let yinv = g.y_inverse()?;
    let yinva = yinv.adjoint();
    let left = g.scheme().left().clone();
    let right = g.scheme().right().cloned();
    let (left2, right2) = (left.clone(), right.clone());
    let bv = move |v: &DVector<C64>| {
        let w = match &right {
            None => a.matvec(v),
            Some(r) => a.matvec(&r.apply(&yinv, v)),
        };
        left.apply(&x, &w)
    };
    let bw = move |w: &DVector<C64>| {
        let v = a.rmatvec(&left2.apply(&xa, w));
        match &right2 {
            None => v,
            Some(r) => r.apply(&yinva, &v),
        }
    };
    Ok((bv, bw))
}

/// Exact diagonal blocks of `FF*` from the rows `F* e_i`, i.e. `dim`
/// products with `F*`.
fn gram_blocks(
    partition: &BlockPartition,
    adj: impl Fn(&DVector<C64>) -> DVector<C64>,
) -> (DMatrix<C64>, f64) {
    let d = partition.dim();
    let mut out = DMatrix::zeros(d, d);
    let mut total = 0.0;
    for (o, s) in partition.blocks() {
        let rows: Vec<DVector<C64>> = (o..o + s)
            .map(|i| {
                let mut e = DVector::zeros(d);
                e[i] = ONE;
                adj(&e)
            })
            .collect();
        for (p, u) in rows.iter().enumerate() {
            total += u.norm_squared();
            for (q, v) in rows.iter().enumerate() {
                out[(o + p, o + q)] = u.dotc(v);
            }
        }
    }
    (out, total)
}

/// Stochastic estimate of the gradient of `log κ_F(XAY⁻¹)`.
///
/// The Gram blocks of `B` are exact; the blocks of `(B†)*B†` and `B†(B†)*`
/// come from Hutchinson-type estimates of `(BB*)⁻¹`, `B*(BB*)⁻²B` (wide `B`)
/// or `B(B*B)⁻²B*`, `(B*B)⁻¹` (tall `B`), each applied by CG. Each side is
/// normalized by the trace of its own estimate.
pub fn estimate_gradient(
    a: &LinearOperator<'_>,
    g: &GroupElement,
    config: &EstimatorConfig,
) -> Result<GradientEstimate> {
    let scheme = g.scheme();
    let (m, n) = (a.nrows(), a.ncols());
    if scheme.m() != m || scheme.n() != n {
        return Err(Error::dims(format!(
            "scheme acts on {}x{} matrices, operator is {m}x{n}",
            scheme.m(),
            scheme.n()
        )));
    }
    let start = a.matvec_count();
    let (bv, bw) = transformed(a, g)?;
    let wide = m <= n;
    let (tol, maxit) = (config.cg_tol, config.cg_max_iters);

    // (BB*)⁻¹ z and (B*B)⁻¹ z
    let solve_left = |z: &DVector<C64>, probe: usize| {
        cg_with(|v| bv(&bw(v)), z, tol, maxit).map_err(|e| with_probe(e, probe))
    };
    let solve_right = |z: &DVector<C64>, probe: usize| {
        cg_with(|v| bw(&bv(v)), z, tol, maxit).map_err(|e| with_probe(e, probe))
    };

    let (gb, norm_sq) = gram_blocks(scheme.left(), &bw);
    let left_apply = |i: usize, z: &DVector<C64>| -> Result<(DVector<C64>, usize)> {
        if wide {
            let s = solve_left(z, i)?;
            Ok((s.x, s.iterations))
        } else {
            // B (B*B)⁻² B* z
            let s1 = solve_right(&bw(z), i)?;
            let s2 = solve_right(&s1.x, i)?;
            Ok((bv(&s2.x), s1.iterations + s2.iterations))
        }
    };
    let (ml, _) = block_diagonal_estimate(m, scheme.left(), config, left_apply)?;
    let trace_l = ml.trace().re;
    if !(trace_l > 0.0) {
        return Err(Error::NotConverged {
            iterations: 0,
            residual: f64::NAN,
            probe: None,
        });
    }
    let inv_nb = c(1.0 / norm_sq);
    let m1 = &gb * inv_nb - &ml * c(1.0 / trace_l);

    let m2 = match scheme.right() {
        None => DMatrix::zeros(0, 0),
        Some(right) => {
            let (gbr, _) = gram_blocks(right, &bv);
            let right_apply = |i: usize, z: &DVector<C64>| -> Result<(DVector<C64>, usize)> {
                if wide {
                    // B*(BB*)⁻²B z
                    let s1 = solve_left(&bv(z), i)?;
                    let s2 = solve_left(&s1.x, i)?;
                    Ok((bw(&s2.x), s1.iterations + s2.iterations))
                } else {
                    let s = solve_right(z, i)?;
                    Ok((s.x, s.iterations))
                }
            };
            let cfg = EstimatorConfig {
                seed: config.seed ^ 0x9e37_79b9_7f4a_7c15,
                ..config.clone()
            };
            let (mr, _) = block_diagonal_estimate(n, right, &cfg, right_apply)?;
            let trace_r = mr.trace().re;
            &mr * c(1.0 / trace_r) - gbr * inv_nb
        }
    };
    let grad = project_to_lie(scheme, &m1, &m2)?;
    Ok(GradientEstimate {
        grad,
        value: 0.5 * (norm_sq.ln() + trace_l.ln()),
        norm_sq,
        pinv_norm_sq: trace_l,
        matvecs: a.matvec_count() - start,
    })
}

/// Gradient descent driven by [`estimate_gradient`]. Values, gradient
/// norms and certificates in the report are estimates; `kappa` per
/// iteration is not available and reported as NaN. The initial and final
/// condition numbers are computed exactly when `exact_summary` is set.
pub fn minimize_condition_stochastic(
    a: &ComplexMatrix,
    config: &OptimizerConfig,
    est: &EstimatorConfig,
    exact_summary: bool,
) -> Result<OptimizationReport> {
    config.scheme.check_matrix(a)?;
    let op = LinearOperator::from_matrix(a);
    let weights = weight_data(&config.scheme);
    let certify = pinv_is_contragredient(&config.scheme, a.nrows(), a.ncols());
    let eta = config.step();
    let tol = config.grad_tol();
    let mut g = GroupElement::identity(&config.scheme);
    let mut iterations = Vec::new();
    let mut k = 0;
    let termination = loop {
        let cfg = EstimatorConfig {
            seed: est.seed.wrapping_add((k as u64).wrapping_mul(0x2545_f491_4f6c_dd1d)),
            ..est.clone()
        };
        let e = estimate_gradient(&op, &g, &cfg)?;
        let gn = e.grad.norm();
        let bound = if certify {
            duality_bound_from_norm(gn, &weights).value()
        } else {
            None
        };
        iterations.push(IterationRecord {
            iter: k,
            value: e.value,
            grad_norm: gn,
            duality_bound: bound,
            kf: e.value.exp(),
            kappa: f64::NAN,
        });
        if bound.is_some_and(|v| v <= config.target_eps) {
            break Termination::Certified;
        }
        if gn <= tol {
            break Termination::Converged;
        }
        if k == config.max_iters {
            break Termination::MaxIters;
        }
        g = g.exp_action(&e.grad, -eta)?;
        k += 1;
    };
    let first = &iterations[0];
    let last = iterations.last().expect("at least one record");
    let (initial_kf, initial_kappa, final_kf, final_kappa) = if exact_summary {
        let s0 = crate::objective::evaluate(a, &GroupElement::identity(&config.scheme))?;
        let s1 = crate::objective::evaluate(a, &g)?;
        (s0.kf(), s0.kappa(), s1.kf(), s1.kappa())
    } else {
        (first.kf, f64::NAN, last.kf, f64::NAN)
    };
    Ok(OptimizationReport {
        certificate: last.duality_bound,
        iterations,
        final_element: g,
        initial_kf,
        final_kf,
        initial_kappa,
        final_kappa,
        termination,
    })
}
