//! Multilinear weighted inequalities on discrete dyadic grids.

// `!(x <= tol)` is how NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dyadic;
pub mod exponents;
pub mod harness;
pub mod norms;
pub mod operators;
pub mod rubio;
pub mod weights;
