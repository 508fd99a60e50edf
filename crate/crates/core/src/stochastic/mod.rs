//! Matrix-free gradient estimation for large sparse inputs: conjugate
//! gradients, Hutchinson and block Hutchinson diagonal estimators, block
//! Lanczos quadrature and the assembled stochastic gradient.

mod cg;
mod gradient;
mod hutchinson;
mod lanczos;
mod operator;

pub use cg::{conjugate_gradient, CgSolution};
pub use gradient::{estimate_gradient, minimize_condition_stochastic, GradientEstimate};
pub use hutchinson::{
    block_hutchinson, hutchinson_diagonal_inverse, DiagonalEstimate, EstimatorConfig, ProbeKind,
};
pub use lanczos::block_lanczos_inverse_block;
pub use operator::LinearOperator;
