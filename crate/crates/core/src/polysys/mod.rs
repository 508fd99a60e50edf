//! Polynomial systems under the Bombieri–Weyl inner product, and their
//! preconditioning by equation shuffles, changes of variables and torus
//! rescalings.

mod action;
mod poly;
mod precondition;
mod torus;

pub use action::{
    act, change_variables, change_variables_capped, gram_sqrt, inverse_jacobian_scaling,
    lie_derivative, shuffle, substitute_linear, supports, EXPANSION_CAP,
};
pub use poly::{
    bw_inner, bw_norm_system, evaluate_system, local_condition, monomials_up_to, EvaluatedPoint,
    Monomial, NormKind, Polynomial, PolynomialSystem,
};
pub use precondition::{full_objective, precondition_full, precondition_shuffle, FullObjective};
pub use torus::{
    h_gradient, h_xi, minimize_h, precondition_sparse, torus_objective, torus_rescale,
    TorusPoint,
};
