//! Structured preconditioners by geodesically convex optimization of the
//! Frobenius condition number.

// `!(x > 0.0)` is used on purpose to reject NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod group;
pub mod io;
pub mod matrix;
pub mod objective;
pub mod optimizer;
pub mod polysys;
pub mod rng;
pub mod stochastic;

pub use error::{Error, Result};
