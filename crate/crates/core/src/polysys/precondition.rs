use nalgebra::DMatrix;
use rayon::prelude::*;

use super::action::{act, gram_sqrt, lie_derivative};
use super::poly::{bw_norm_system, evaluate_system, PolynomialSystem};
use crate::error::{Error, Result};
use crate::group::{project_to_lie, GroupElement, GroupScheme, LieDirection, WeightData};
use crate::matrix::{c, pseudoinverse, svd_dense, ComplexMatrix, C64};
use crate::objective::duality_bound_from_norm;
use crate::optimizer::{
    minimize_cross_condition, IterationRecord, OptimizationReport, OptimizerConfig, StepSize,
    Termination,
};

/// Per-iterate quantities recorded by the polynomial descent loops.
pub(crate) struct Snapshot {
    pub value: f64,
    pub grad_norm: f64,
    pub certificate: Option<f64>,
    pub kf: f64,
    pub kappa: f64,
}

pub(crate) struct DescentOutcome<S> {
    pub last: S,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
}

/// Gradient descent with base step `eta0`, halving the step until the value
/// does not increase. Gives up (as converged) once the step has been halved
/// below `1e-12·eta0` without progress.
pub(crate) fn backtracking_descent<S>(
    first: S,
    snapshot: impl Fn(&S) -> Snapshot,
    eps: f64,
    grad_tol: f64,
    max_iters: usize,
    eta0: f64,
    mut step: impl FnMut(&S, f64) -> Result<S>,
) -> Result<DescentOutcome<S>> {
    let mut state = first;
    let mut iterations = Vec::new();
    let mut k = 0;
    let termination = loop {
        let snap = snapshot(&state);
        iterations.push(IterationRecord {
            iter: k,
            value: snap.value,
            grad_norm: snap.grad_norm,
            duality_bound: snap.certificate,
            kf: snap.kf,
            kappa: snap.kappa,
        });
        if snap.certificate.is_some_and(|v| v <= eps) {
            break Termination::Certified;
        }
        if snap.grad_norm <= grad_tol {
            break Termination::Converged;
        }
        if k == max_iters {
            break Termination::MaxIters;
        }
        let mut eta = eta0;
        let next = loop {
            // an overshooting trial step can overflow the exponential; treat it
            // like an increase
            match step(&state, eta) {
                Ok(cand) if snapshot(&cand).value <= snap.value => break Some(cand),
                Ok(_) => {}
                Err(e) if e.is_numerical() => {}
                Err(e) => return Err(e),
            }
            eta *= 0.5;
            if eta < 1e-12 * eta0 {
                break None;
            }
        };
        match next {
            Some(s) => state = s,
            None => break Termination::Converged,
        }
        k += 1;
    };
    Ok(DescentOutcome {
        last: state,
        iterations,
        termination,
    })
}

pub(crate) fn report_from<S>(
    outcome: DescentOutcome<S>,
    final_element: GroupElement,
) -> OptimizationReport {
    let first = &outcome.iterations[0];
    let last = outcome.iterations.last().expect("at least one record");
    OptimizationReport {
        initial_kf: first.kf,
        initial_kappa: first.kappa,
        final_kf: last.kf,
        final_kappa: last.kappa,
        certificate: last.duality_bound,
        termination: outcome.termination,
        final_element,
        iterations: outcome.iterations,
    }
}

fn nonzero_jacobian(f: &PolynomialSystem, xi: &[C64]) -> Result<ComplexMatrix> {
    let jac = evaluate_system(f, xi)?.jacobian;
    if jac.is_zero() {
        return Err(Error::ZeroJacobian);
    }
    Ok(jac)
}

/// Optimal equation shuffle `X` for `μ_F(X·f, ξ)`.
///
/// `μ_F(X·f, ξ) = ‖X S_f‖_F ‖D_ξ(f)† X⁻¹‖_F` whenever `D_ξ(f)` has full row
/// rank, so this is the cross objective with `A = S_f` and `B = D_ξ(f)†`.
/// The scheme must be left-only on `m = #equations` rows.
pub fn precondition_shuffle(
    f: &PolynomialSystem,
    xi: &[C64],
    config: &OptimizerConfig,
) -> Result<(GroupElement, OptimizationReport)> {
    let scheme = &config.scheme;
    if !scheme.is_left_only() || scheme.m() != f.len() {
        return Err(Error::dims(format!(
            "shuffle preconditioning needs a left-only scheme on {} rows",
            f.len()
        )));
    }
    let jac = nonzero_jacobian(f, xi)?;
    let s = ComplexMatrix::from_dense(gram_sqrt(f));
    let dpinv = pseudoinverse(&jac, None)?;
    let report = minimize_cross_condition(&s, &dpinv, config)?;
    Ok((report.final_element.clone(), report))
}

/// `C(X, Y) = log ‖(X, Y)·f‖_W + log ‖Y D_ξ(f)† X⁻¹‖_F` at one group
/// element, with its Riemannian gradient.
#[derive(Clone, Debug)]
pub struct FullObjective {
    pub g: GroupElement,
    /// `(X, Y)·f`
    pub system: PolynomialSystem,
    /// `Y D_ξ(f)† X⁻¹`
    pub pinv_jacobian: DMatrix<C64>,
    pub value: f64,
    pub grad: LieDirection,
    pub grad_norm: f64,
}

impl FullObjective {
    fn kappa(&self) -> f64 {
        let f = svd_dense(&self.pinv_jacobian, None);
        f.sigma_max() / f.sigma_min_nonzero()
    }
}

fn full_objective_with(
    f: &PolynomialSystem,
    dpinv: &DMatrix<C64>,
    g: &GroupElement,
) -> Result<FullObjective> {
    let scheme = g.scheme();
    let w = act(g.x(), g.y(), f)?;
    let nw2 = bw_norm_system(&w).powi(2);
    if nw2 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let cp = g.apply_contragredient(dpinv)?;
    let nc2 = cp.norm_squared();
    let matrix_part = project_to_lie(
        scheme,
        &(cp.adjoint() * &cp * c(-1.0 / nc2)),
        &(&cp * cp.adjoint() * c(1.0 / nc2)),
    )?;
    let basis = scheme.lie_basis();
    let coeffs = basis
        .par_iter()
        .map(|e| {
            let pw = lie_derivative(&w, e.h1(), e.h2())?;
            let pairing: f64 = pw
                .polys()
                .iter()
                .zip(w.polys())
                .map(|(p, q)| super::poly::bw_inner(p, q).re)
                .sum();
            Ok(pairing / nw2)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut grad = matrix_part;
    for (e, a) in basis.iter().zip(coeffs) {
        grad = grad.add(&e.scale(a));
    }
    let value = 0.5 * (nw2.ln() + nc2.ln());
    Ok(FullObjective {
        g: g.clone(),
        system: w,
        pinv_jacobian: cp,
        value,
        grad_norm: grad.norm(),
        grad,
    })
}

/// Evaluate the joint shuffle and change-of-variables objective at `g`.
pub fn full_objective(
    f: &PolynomialSystem,
    xi: &[C64],
    g: &GroupElement,
) -> Result<FullObjective> {
    let scheme = g.scheme();
    if scheme.is_left_only() || scheme.m() != f.len() || scheme.n() != f.nvars() {
        return Err(Error::dims(format!(
            "joint preconditioning needs a left-right scheme of sizes {} and {}",
            f.len(),
            f.nvars()
        )));
    }
    let jac = nonzero_jacobian(f, xi)?;
    let dpinv = pseudoinverse(&jac, None)?.to_dense();
    full_objective_with(f, &dpinv, g)
}

/// Joint preconditioning `(X, Y)` by shuffles and linear changes of
/// variables. Base step `(D+2)⁻¹` (or the configured fixed step), halved
/// whenever the objective would increase. The certificate uses the weight
/// constants `N = D+2`, `γ = (D+2)^{1−m−n}/(m+n)`.
pub fn precondition_full(
    f: &PolynomialSystem,
    xi: &[C64],
    config: &OptimizerConfig,
) -> Result<(GroupElement, OptimizationReport)> {
    let scheme: &GroupScheme = &config.scheme;
    let g0 = GroupElement::identity(scheme);
    let first = full_objective(f, xi, &g0)?;
    let dpinv = pseudoinverse(&nonzero_jacobian(f, xi)?, None)?.to_dense();
    let d = f.max_degree() as usize;
    let weights = WeightData::polynomial(f.len(), f.nvars(), d);
    let eta0 = match config.step_size {
        StepSize::Auto => 1.0 / (d + 2) as f64,
        StepSize::Fixed(s) => s,
    };
    if !(eta0 > 0.0) || !(config.target_eps > 0.0) {
        return Err(Error::InvalidArgument("step and target_eps must be positive".into()));
    }
    let tol = config
        .grad_tol_override
        .unwrap_or(weights.weight_margin * config.target_eps);
    let outcome = backtracking_descent(
        first,
        |s: &FullObjective| Snapshot {
            value: s.value,
            grad_norm: s.grad_norm,
            certificate: duality_bound_from_norm(s.grad_norm, &weights).value(),
            kf: s.value.exp(),
            kappa: s.kappa(),
        },
        config.target_eps,
        tol,
        config.max_iters,
        eta0,
        |s, eta| {
            let g = s.g.exp_action(&s.grad, -eta)?;
            full_objective_with(f, &dpinv, &g)
        },
    )?;
    let g = outcome.last.g.clone();
    Ok((g.clone(), report_from(outcome, g)))
}
