//! Riemannian gradient descent with constant step `1/L` on `G/K`.

use crate::error::{Error, Result};
use crate::group::{weight_data, GroupElement, GroupScheme, WeightData};
use crate::matrix::{condition_frobenius, ComplexMatrix};
use crate::objective::{
    duality_bound_from_norm, evaluate, evaluate_cross, pinv_is_contragredient, DualityBound,
    ObjectiveState,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    /// `1/L` with `L` the smoothness constant of the scheme.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    General,
    /// Left-only schemes on full row rank inputs: the objective is strongly
    /// convex on its sublevel sets with parameter `4/κ_F²`, which also gives
    /// the certificate `‖∇C‖²/(2μ)`.
    StronglyConvex,
    Auto,
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub scheme: GroupScheme,
    pub target_eps: f64,
    pub max_iters: usize,
    pub step_size: StepSize,
    pub mode: Mode,
    pub grad_tol_override: Option<f64>,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(scheme: GroupScheme) -> Self {
        OptimizerConfig {
            scheme,
            target_eps: 1e-2,
            max_iters: 1000,
            step_size: StepSize::Auto,
            mode: Mode::Auto,
            grad_tol_override: None,
            seed: 0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.target_eps = eps;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_step(mut self, step: StepSize) -> Self {
        self.step_size = step;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol_override = Some(tol);
        self
    }

    pub fn step(&self) -> f64 {
        match self.step_size {
            StepSize::Auto => 1.0 / self.scheme.smoothness(),
            StepSize::Fixed(s) => s,
        }
    }

    /// Gradient-norm stopping threshold: the override, or `γ·ε`.
    pub fn grad_tol(&self) -> f64 {
        self.grad_tol_override
            .unwrap_or(weight_data(&self.scheme).weight_margin * self.target_eps)
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_eps > 0.0) {
            return Err(Error::InvalidArgument("target_eps must be positive".into()));
        }
        if !(self.step() > 0.0) {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    Certified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub duality_bound: Option<f64>,
    pub kf: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub iterations: Vec<IterationRecord>,
    pub final_element: GroupElement,
    pub initial_kf: f64,
    pub final_kf: f64,
    pub initial_kappa: f64,
    pub final_kappa: f64,
    pub certificate: Option<f64>,
    pub termination: Termination,
}

impl OptimizationReport {
    /// Number of gradient steps taken.
    pub fn steps(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    pub fn improvement(&self) -> f64 {
        self.initial_kf / self.final_kf
    }

    pub fn kappa_improvement(&self) -> f64 {
        self.initial_kappa / self.final_kappa
    }
}

fn strongly_convex_requested(config: &OptimizerConfig, state: &ObjectiveState) -> Result<bool> {
    let eligible = config.scheme.is_left_only() && state.b.nrows() <= state.b.ncols();
    match config.mode {
        Mode::General => Ok(false),
        Mode::Auto => Ok(eligible && !state.rank_deficient),
        Mode::StronglyConvex => {
            state.require_full_rank()?;
            if !eligible {
                return Err(Error::InvalidArgument(
                    "strongly convex mode needs a left-only scheme and m <= n".into(),
                ));
            }
            Ok(true)
        }
    }
}

/// Certificate at a state: the duality bound, improved in strongly convex
/// mode by the Polyak–Łojasiewicz bound `‖∇C‖²/(2μ)`, `μ = 4/κ_F²(B)`.
pub(crate) fn certificate(
    state: &ObjectiveState,
    weights: &WeightData,
    strongly_convex: bool,
) -> DualityBound {
    let dual = duality_bound_from_norm(state.grad_norm, weights);
    if strongly_convex {
        let mu = 4.0 / state.kf().powi(2);
        dual.min(DualityBound::Bound(state.grad_norm.powi(2) / (2.0 * mu)))
    } else {
        dual
    }
}

pub(crate) struct Descent<'a> {
    pub config: &'a OptimizerConfig,
    pub weights: WeightData,
    pub strongly_convex: bool,
    /// False when the objective is not convex and no bound is valid.
    pub certify: bool,
}

impl Descent<'_> {
    pub(crate) fn run(
        &self,
        first: ObjectiveState,
        mut eval: impl FnMut(&GroupElement) -> Result<ObjectiveState>,
    ) -> Result<OptimizationReport> {
        let config = self.config;
        let eta = config.step();
        let tol = config.grad_tol();
        let initial_kf = first.kf();
        let initial_kappa = first.kappa();
        let mut state = first;
        let mut iterations = Vec::new();
        let mut k = 0;
        let termination = loop {
            let cert = if self.certify {
                certificate(&state, &self.weights, self.strongly_convex)
            } else {
                DualityBound::Infeasible
            };
            iterations.push(IterationRecord {
                iter: k,
                value: state.value,
                grad_norm: state.grad_norm,
                duality_bound: cert.value(),
                kf: state.kf(),
                kappa: state.kappa(),
            });
            if cert.value().is_some_and(|v| v <= config.target_eps) {
                break Termination::Certified;
            }
            if state.grad_norm <= tol {
                break Termination::Converged;
            }
            if k == config.max_iters {
                break Termination::MaxIters;
            }
            let g = state.g.exp_action(&state.grad, -eta)?;
            state = eval(&g)?;
            k += 1;
        };
        let last = iterations.last().expect("at least one record");
        Ok(OptimizationReport {
            certificate: last.duality_bound,
            final_kf: last.kf,
            final_kappa: last.kappa,
            iterations,
            final_element: state.g,
            initial_kf,
            initial_kappa,
            termination,
        })
    }
}

/// Minimize `log κ_F(XAY⁻¹)` over the scheme, starting from the identity.
pub fn minimize_condition(a: &ComplexMatrix, config: &OptimizerConfig) -> Result<OptimizationReport> {
    config.validate()?;
    config.scheme.check_matrix(a)?;
    let first = evaluate(a, &GroupElement::identity(&config.scheme))?;
    let strongly_convex = strongly_convex_requested(config, &first)?;
    let (m, n) = a.shape();
    Descent {
        config,
        weights: weight_data(&config.scheme),
        strongly_convex,
        certify: pinv_is_contragredient(&config.scheme, m, n),
    }
    .run(first, |g| evaluate(a, g))
}

/// Minimize `log ‖XAY⁻¹‖_F + log ‖YBX⁻¹‖_F`. Always runs in general mode.
pub fn minimize_cross_condition(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    config: &OptimizerConfig,
) -> Result<OptimizationReport> {
    config.validate()?;
    if config.mode == Mode::StronglyConvex {
        return Err(Error::InvalidArgument(
            "strongly convex mode is only available for the condition objective".into(),
        ));
    }
    let first = evaluate_cross(a, b, &GroupElement::identity(&config.scheme))?;
    Descent {
        config,
        weights: weight_data(&config.scheme),
        strongly_convex: false,
        certify: true,
    }
    .run(first, |g| evaluate_cross(a, b, g))
}

/// Explicit iteration bound for a run to accuracy `config.target_eps`,
/// given an estimate of the optimal `κ_F*`.
///
/// General mode: `2L·log(κ_F(A)/κ_F*)/(γε)²`. Strongly convex mode:
/// `κ_F²(A)·(L/4)·log(log(κ_F(A)/κ_F*)/ε)`, zero when the logarithm is not
/// positive.
pub fn predicted_iteration_bound(
    a: &ComplexMatrix,
    config: &OptimizerConfig,
    kf_star_estimate: f64,
) -> Result<u64> {
    let kf = condition_frobenius(a)?;
    let gap = (kf / kf_star_estimate).ln();
    if gap <= 0.0 {
        return Ok(0);
    }
    let l = config.scheme.smoothness();
    let strongly = match config.mode {
        Mode::General => false,
        Mode::StronglyConvex => true,
        Mode::Auto => {
            config.scheme.is_left_only()
                && a.nrows() <= a.ncols()
                && crate::matrix::svd(a, None)?.rank() == a.nrows()
        }
    };
    let t = if strongly {
        let r = gap / config.target_eps;
        if r <= 1.0 {
            0.0
        } else {
            kf * kf * (l / 4.0) * r.ln()
        }
    } else {
        let eps_prime = weight_data(&config.scheme).weight_margin * config.target_eps;
        2.0 * l * gap / (eps_prime * eps_prime)
    };
    Ok(t.ceil() as u64)
}
