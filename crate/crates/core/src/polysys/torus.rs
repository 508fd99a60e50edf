use nalgebra::DMatrix;

use super::action::{lie_derivative, shuffle};
use super::poly::{bw_inner, bw_norm_system, evaluate_system, PolynomialSystem};
use super::precondition::{backtracking_descent, report_from, Snapshot};
use crate::error::{Error, Result};
use crate::group::{project_to_lie, GroupElement, LieDirection};
use crate::matrix::{c, svd_dense, C64};
use crate::optimizer::{OptimizationReport, OptimizerConfig, StepSize};

/// Positive variable scaling `t ∈ ℝ_{>0}ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    t: Vec<f64>,
}

impl TorusPoint {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if let Some(k) = t.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "torus coordinate {k} must be positive and finite"
            )));
        }
        Ok(TorusPoint { t })
    }

    pub fn ones(n: usize) -> Self {
        TorusPoint { t: vec![1.0; n] }
    }

    pub fn from_log(s: &[f64]) -> Self {
        TorusPoint {
            t: s.iter().map(|v| v.exp()).collect(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn log(&self) -> Vec<f64> {
        self.t.iter().map(|v| v.ln()).collect()
    }

    /// `ξ/t` coordinatewise, where the rescaled system vanishes.
    pub fn scale_point(&self, xi: &[C64]) -> Vec<C64> {
        xi.iter().zip(&self.t).map(|(x, t)| x / t).collect()
    }
}

/// `f(t₁x₁, …, t_nx_n)`: coefficient `f_α` becomes `f_α t^α`, so a root `ξ`
/// of `f` becomes the root `ξ/t`. The support is unchanged.
pub fn torus_rescale(f: &PolynomialSystem, t: &TorusPoint) -> Result<PolynomialSystem> {
    if t.len() != f.nvars() {
        return Err(Error::dims(format!(
            "torus point has {} coordinates, system has {} variables",
            t.len(),
            f.nvars()
        )));
    }
    let polys = f
        .polys()
        .iter()
        .map(|p| {
            p.map_coeffs(|m, v| {
                let s: f64 = m.0.iter().zip(t.as_slice()).map(|(&a, tk)| tk.powi(a as i32)).product();
                v * c(s)
            })
        })
        .collect();
    Ok(f.with_polys(polys))
}

/// `u_k = log(|ξ_k|/t_k)`; fails on a zero coordinate.
fn log_ratios(xi: &[C64], t: &TorusPoint) -> Result<Vec<f64>> {
    if xi.len() != t.len() {
        return Err(Error::dims("point and torus point differ in length"));
    }
    xi.iter()
        .zip(t.as_slice())
        .enumerate()
        .map(|(k, (x, tk))| {
            if x.norm() == 0.0 {
                Err(Error::ZeroCoordinate(k))
            } else {
                Ok((x.norm() / tk).ln())
            }
        })
        .collect()
}

/// Softmax weights of `n·u`, the normalized summands of `h_ξ`.
fn summand_weights(u: &[f64]) -> Vec<f64> {
    let n = u.len() as f64;
    let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = u.iter().map(|v| (n * (v - top)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// `h_ξ(t) = log Σ_i |ξ|^{ω_i} t^{−ω_i}` with `ω_i = n e_i − 1`, evaluated
/// as `logsumexp(n·u) − Σ u` for `u_k = log(|ξ_k|/t_k)`.
pub fn h_xi(xi: &[C64], t: &TorusPoint) -> Result<f64> {
    let u = log_ratios(xi, t)?;
    let n = u.len() as f64;
    let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = n * top + u.iter().map(|v| (n * (v - top)).exp()).sum::<f64>().ln();
    Ok(lse - u.iter().sum::<f64>())
}

/// Gradient of `s ↦ h_ξ(e^s)`: `−Σ_i p_i ω_i` with `p` the normalized
/// summands. It vanishes exactly when all `|ξ_k|/t_k` agree.
pub fn h_gradient(xi: &[C64], t: &TorusPoint) -> Result<Vec<f64>> {
    let u = log_ratios(xi, t)?;
    let n = u.len() as f64;
    Ok(summand_weights(&u).iter().map(|p| 1.0 - n * p).collect())
}

/// Minimize `h_ξ` by gradient descent in `log t` from `t = 1`, base step
/// `1/n²` with halving on increase.
pub fn minimize_h(xi: &[C64], tol: f64, max_iters: usize) -> Result<TorusPoint> {
    let n = xi.len();
    let eta0 = 1.0 / (n * n) as f64;
    let mut s = vec![0.0; n];
    let mut t = TorusPoint::ones(n);
    let mut value = h_xi(xi, &t)?;
    for _ in 0..max_iters {
        let g = h_gradient(xi, &t)?;
        if g.iter().map(|v| v * v).sum::<f64>().sqrt() <= tol {
            break;
        }
        let mut eta = eta0;
        loop {
            let cand: Vec<f64> = s.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
            let ct = TorusPoint::from_log(&cand);
            let cv = h_xi(xi, &ct)?;
            if cv <= value || eta < 1e-14 {
                s = cand;
                t = ct;
                value = cv;
                break;
            }
            eta *= 0.5;
        }
    }
    Ok(t)
}

struct TorusState {
    x: GroupElement,
    s: Vec<f64>,
    value: f64,
    mu: f64,
    kappa: f64,
    x_grad: LieDirection,
    s_grad: Vec<f64>,
    grad_norm: f64,
}

fn torus_state(
    f: &PolynomialSystem,
    xi: &[C64],
    jac: &DMatrix<C64>,
    x: &GroupElement,
    s: Vec<f64>,
) -> Result<TorusState> {
    let t = TorusPoint::from_log(&s);
    let n = f.nvars();
    let w = shuffle(x.x(), &torus_rescale(f, &t)?)?;
    let nw2 = bw_norm_system(&w).powi(2);
    if nw2 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    // Jacobian of X·f_t at ξ/t is X·D_ξ(f)·diag(t)
    let b = x.x() * jac * DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| c(t.t[k])));
    let svd = svd_dense(&b, None);
    if svd.rank() == 0 {
        return Err(Error::ZeroJacobian);
    }
    let bp = svd.pseudoinverse();
    let np2 = bp.norm_squared();
    let mu = (nw2 * np2).sqrt();
    let value = mu + h_xi(xi, &t)?;

    let gram = DMatrix::from_fn(w.len(), w.len(), |i, j| bw_inner(&w.polys()[i], &w.polys()[j]));
    let x_grad = project_to_lie(
        x.scheme(),
        &((gram * c(1.0 / nw2) - bp.adjoint() * &bp * c(1.0 / np2)) * c(mu)),
        &DMatrix::zeros(0, 0),
    )?;
    let dh = h_gradient(xi, &t)?;
    let bpbp = &bp * bp.adjoint();
    let zero_m = DMatrix::zeros(w.len(), w.len());
    let mut s_grad = Vec::with_capacity(n);
    for k in 0..n {
        // d/ds_k of f_t is x_k ∂_k f_t, the Lie derivative along −E_kk
        let mut e = DMatrix::zeros(n, n);
        e[(k, k)] = c(-1.0);
        let dw = lie_derivative(&w, &zero_m, &e)?;
        let pairing: f64 = dw
            .polys()
            .iter()
            .zip(w.polys())
            .map(|(p, q)| bw_inner(p, q).re)
            .sum();
        s_grad.push(mu * (pairing / nw2 - bpbp[(k, k)].re / np2) + dh[k]);
    }
    let grad_norm = (x_grad.norm().powi(2) + s_grad.iter().map(|v| v * v).sum::<f64>()).sqrt();
    Ok(TorusState {
        x: x.clone(),
        s,
        value,
        mu,
        kappa: svd.sigma_max() / svd.sigma_min_nonzero(),
        x_grad,
        s_grad,
        grad_norm,
    })
}

fn check_torus_inputs(f: &PolynomialSystem, xi: &[C64], x: &GroupElement) -> Result<DMatrix<C64>> {
    if !x.scheme().is_left_only() || x.scheme().m() != f.len() {
        return Err(Error::dims(format!(
            "torus preconditioning needs a left-only scheme on {} rows",
            f.len()
        )));
    }
    if let Some(k) = xi.iter().position(|v| v.norm() == 0.0) {
        return Err(Error::ZeroCoordinate(k));
    }
    Ok(evaluate_system(f, xi)?.jacobian.to_dense())
}

/// `μ_F(X·(f∘t), ξ/t) + h_ξ(t)` with `(f∘t)(x) = f(t₁x₁, …, t_nx_n)`.
pub fn torus_objective(
    f: &PolynomialSystem,
    xi: &[C64],
    x: &GroupElement,
    t: &TorusPoint,
) -> Result<f64> {
    let jac = check_torus_inputs(f, xi, x)?;
    if t.len() != f.nvars() {
        return Err(Error::dims("torus point length differs from the number of variables"));
    }
    Ok(torus_state(f, xi, &jac, x, t.log())?.value)
}

/// Joint descent on `(X, t)` for the torus objective. Base step `1/8`
/// unless a fixed step is configured, halved on increase. There is no
/// duality certificate: the run stops when the joint gradient norm drops
/// below the override tolerance (default `target_eps`). `kf` in the report
/// is `μ_F` of the rescaled, shuffled system at `ξ/t`.
pub fn precondition_sparse(
    f: &PolynomialSystem,
    xi: &[C64],
    config: &OptimizerConfig,
) -> Result<(GroupElement, TorusPoint, OptimizationReport)> {
    let x0 = GroupElement::identity(&config.scheme);
    let jac = check_torus_inputs(f, xi, &x0)?;
    let eta0 = match config.step_size {
        StepSize::Auto => 0.125,
        StepSize::Fixed(s) => s,
    };
    if !(eta0 > 0.0) || !(config.target_eps > 0.0) {
        return Err(Error::InvalidArgument("step and target_eps must be positive".into()));
    }
    let first = torus_state(f, xi, &jac, &x0, vec![0.0; f.nvars()])?;
    let outcome = backtracking_descent(
        first,
        |s: &TorusState| Snapshot {
            value: s.value,
            grad_norm: s.grad_norm,
            certificate: None,
            kf: s.mu,
            kappa: s.kappa,
        },
        config.target_eps,
        config.grad_tol_override.unwrap_or(config.target_eps),
        config.max_iters,
        eta0,
        |s, eta| {
            let x = s.x.exp_action(&s.x_grad, -eta)?;
            let next: Vec<f64> = s.s.iter().zip(&s.s_grad).map(|(a, g)| a - eta * g).collect();
            torus_state(f, xi, &jac, &x, next)
        },
    )?;
    let x = outcome.last.x.clone();
    let t = TorusPoint::from_log(&outcome.last.s);
    Ok((x.clone(), t, report_from(outcome, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{BlockPartition, GroupScheme};
    use crate::polysys::poly::{local_condition, NormKind, Polynomial};
    use crate::polysys::test_support::random_system_with_root;
    use crate::rng::{complex_gaussian_matrix, substream};
    use rand::Rng;

    fn pt(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x)).collect()
    }

    fn scheme(m: usize) -> GroupScheme {
        GroupScheme::left_only(BlockPartition::full(m), m)
    }

    /// Sparse system with a root at `xi`: a few random monomials per equation
    /// plus a constant that cancels the value at `xi`.
    fn sparse_system(seed: u64, xi: &[C64]) -> PolynomialSystem {
        let mut rng = substream(seed, 0);
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

    #[test]
    fn h_at_unit_point() {
        for n in 1..5 {
            let v = h_xi(&pt(&vec![1.0; n]), &TorusPoint::ones(n)).unwrap();
            assert!((v - (n as f64).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn h_rejects_zero_coordinate() {
        assert_eq!(
            h_xi(&pt(&[1.0, 0.0]), &TorusPoint::ones(2)).unwrap_err(),
            Error::ZeroCoordinate(1)
        );
    }

    #[test]
    fn h_matches_definition() {
        let xi = vec![C64::new(2.0, 1.0), c(-0.3), C64::new(0.0, 4.0)];
        let t = TorusPoint::new(vec![0.7, 1.3, 2.2]).unwrap();
        let n = 3;
        let mut sum = 0.0;
        for i in 0..n {
            let mut term = 1.0;
            for j in 0..n {
                let w = if i == j { n as f64 - 1.0 } else { -1.0 };
                term *= (xi[j].norm() / t.as_slice()[j]).powf(w);
            }
            sum += term;
        }
        assert!((h_xi(&xi, &t).unwrap() - sum.ln()).abs() < 1e-12);
    }

    #[test]
    fn h_gradient_matches_finite_differences() {
        let xi = vec![C64::new(2.0, 1.0), c(-0.3), C64::new(0.0, 4.0)];
        let s = [0.1, -0.4, 0.3];
        let g = h_gradient(&xi, &TorusPoint::from_log(&s)).unwrap();
        for k in 0..3 {
            let mut sp = s;
            let mut sm = s;
            sp[k] += 1e-6;
            sm[k] -= 1e-6;
            let fd = (h_xi(&xi, &TorusPoint::from_log(&sp)).unwrap()
                - h_xi(&xi, &TorusPoint::from_log(&sm)).unwrap())
                / 2e-6;
            assert!((fd - g[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn h_minimizer_two_variables() {
        let t = minimize_h(&pt(&[2.0, 1.0]), 1e-12, 10_000).unwrap();
        let r = t.as_slice()[0] / t.as_slice()[1];
        assert!((r - 2.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn h_is_midpoint_convex() {
        let mut rng = substream(20, 0);
        for _ in 0..20 {
            let xi: Vec<C64> = complex_gaussian_matrix(&mut rng, 4, 1).iter().copied().collect();
            let s0: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let at = |a: f64| {
                let s: Vec<f64> = s0.iter().zip(&v).map(|(x, d)| x + a * d).collect();
                h_xi(&xi, &TorusPoint::from_log(&s)).unwrap()
            };
            for a in [0.1, 0.5, 2.0] {
                assert!(at(0.0) <= 0.5 * (at(a) + at(-a)) + 1e-12);
            }
        }
    }

    #[test]
    fn rescale_preserves_support_and_moves_root() {
        let xi = pt(&[1.5, -0.5, 2.0]);
        let f = sparse_system(21, &xi);
        let t = TorusPoint::new(vec![0.5, 3.0, 1.2]).unwrap();
        let g = torus_rescale(&f, &t).unwrap();
        assert_eq!(crate::polysys::supports(&f), crate::polysys::supports(&g));
        let v = evaluate_system(&g, &t.scale_point(&xi)).unwrap().values;
        assert!(v.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn torus_objective_at_identity_is_mu_plus_h() {
        let xi = pt(&[1.5, -0.5]);
        let f = sparse_system(22, &xi);
        let x = GroupElement::identity(&scheme(2));
        let t = TorusPoint::new(vec![0.8, 1.7]).unwrap();
        let direct = local_condition(&torus_rescale(&f, &t).unwrap(), &t.scale_point(&xi), NormKind::Frobenius)
            .unwrap()
            + h_xi(&xi, &t).unwrap();
        assert!((torus_objective(&f, &xi, &x, &t).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn torus_gradient_matches_finite_differences() {
        let mut rng = substream(23, 0);
        let xi = pt(&[1.5, -0.5, 0.8]);
        let f = random_system_with_root(&mut rng, 3, &xi, 2);
        let sch = scheme(3);
        let jac = evaluate_system(&f, &xi).unwrap().jacobian.to_dense();
        let x = GroupElement::new(&sch, DMatrix::identity(3, 3) + complex_gaussian_matrix(&mut rng, 3, 3) * c(0.2), None)
            .unwrap();
        let s0 = vec![0.2, -0.1, 0.3];
        let st = torus_state(&f, &xi, &jac, &x, s0.clone()).unwrap();
        let h = 1e-6;
        for _ in 0..5 {
            let dir = LieDirection::random(&sch, &mut rng);
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let at = |a: f64| {
                let xs = x.exp_action(&dir, a).unwrap();
                let s: Vec<f64> = s0.iter().zip(&v).map(|(p, d)| p + a * d).collect();
                torus_state(&f, &xi, &jac, &xs, s).unwrap().value
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let an = st.x_grad.inner(&dir) + st.s_grad.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{fd} {an}");
        }
    }

    #[test]
    fn symmetric_root_keeps_balanced_scaling() {
        let f = PolynomialSystem::from_polys(
            2,
            vec![
                Polynomial::from_real(2, &[(&[1, 0], 1.0), (&[0, 0], -1.0)]),
                Polynomial::from_real(2, &[(&[0, 1], 1.0), (&[0, 0], -1.0)]),
            ],
        )
        .unwrap();
        let xi = pt(&[1.0, 1.0]);
        let g = h_gradient(&xi, &TorusPoint::ones(2)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        let cfg = OptimizerConfig::new(scheme(2)).with_max_iters(200);
        let (_, t, report) = precondition_sparse(&f, &xi, &cfg).unwrap();
        assert!((t.as_slice()[0] - t.as_slice()[1]).abs() < 1e-8);
        assert!(report.iterations.windows(2).all(|w| w[1].value <= w[0].value + 1e-12));
    }

    #[test]
    fn unbalanced_root_is_balanced() {
        let xi = pt(&[10.0, 0.1]);
        let f = sparse_system(24, &xi);
        let cfg = OptimizerConfig::new(scheme(2)).with_max_iters(2000).with_grad_tol(1e-6);
        let (_, t, report) = precondition_sparse(&f, &xi, &cfg).unwrap();
        let r0 = xi[0].norm() / t.as_slice()[0];
        let r1 = xi[1].norm() / t.as_slice()[1];
        assert!(r0 / r1 < 1.5 && r1 / r0 < 1.5, "{r0} {r1}");
        assert!(report.iterations.last().unwrap().value < report.iterations[0].value);
    }

    #[test]
    fn sparse_runs_are_monotone() {
        for seed in 0..10 {
            let mut rng = substream(100 + seed, 1);
            let xi: Vec<C64> = (0..3)
                .map(|_| C64::from_polar(rng.random_range(0.2..5.0), rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let f = sparse_system(100 + seed, &xi);
            let cfg = OptimizerConfig::new(scheme(3)).with_max_iters(100);
            let (_, _, report) = precondition_sparse(&f, &xi, &cfg).unwrap();
            assert!(report.iterations.windows(2).all(|w| w[1].value <= w[0].value + 1e-12));
        }
    }

    #[test]
    fn sparse_rejects_zero_coordinate() {
        let xi = pt(&[1.0, 0.0]);
        let f = sparse_system(25, &pt(&[1.0, 1.0]));
        let cfg = OptimizerConfig::new(scheme(2));
        assert!(matches!(precondition_sparse(&f, &xi, &cfg), Err(Error::ZeroCoordinate(1))));
    }
}
