//! Rubio de Francia iteration with explicit truncation, and the three off-diagonal weight constructions.

mod cases;
mod iterate;

use thiserror::Error;

pub use cases::{
    ball_cube, case2_dual_witness, construct_case1, construct_case2, construct_case3, CaseExponents, CaseReport,
    CaseSetup, Regime, IDENTITY_TOL,
};
pub use iterate::{
    buckley_constant, maximal_norm_bound, rdf_iterate, tail_bound, BoundMode, MaximalVariant, NormBound, RdfCerts,
    RdfOperator, RdfResult, DEFAULT_K, DEFAULT_SAFETY,
};

use crate::dyadic::DyadicError;
use crate::exponents::ExponentError;
use crate::weights::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RubioError {
    #[error("h must be nonnegative and finite; cell {cell} has {value}")]
    Negative { cell: usize, value: f64 },
    #[error("out of range: {0}")]
    Range(String),
    #[error("exponents outside the regime: {0}")]
    Regime(String),
    #[error("exponent identity fails: {0}")]
    Identity(String),
    #[error("{0}")]
    Shape(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Exponents(#[from] ExponentError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Grid(#[from] DyadicError),
}

#[cfg(test)]
mod tests;
