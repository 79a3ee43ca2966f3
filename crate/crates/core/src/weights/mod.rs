//! Weight characteristics, cube families and the factorization of multilinear weights.

mod constants;
mod factorization;
pub(crate) mod family;
mod generators;
mod measure;
mod mixed;

use thiserror::Error;

pub use constants::{
    a_infinity_report, ap_constant, apr_constant, multilinear_ap_constant, multilinear_case_form,
    multilinear_constant, multilinear_delta_form, power_means, Certificate, A_INFINITY_GRID, FORM_TOLERANCE,
};
pub use factorization::{
    lemma_main_forward, lemma_main_inverse, norm_rewrite_check, BoundCheck, LemmaForward, LemmaInverse,
    NormRewrite, CERT_TOL,
};
pub use family::{CubeFamily, FamilyMode};
pub use generators::{
    generate_weight, log_uniform, power_weight, random_a1, random_a1_bound, tensor_weight, GeneratedWeight,
    WeightGen,
};
pub use measure::{product, BaseMeasure, Weight};
pub use mixed::{mixed_class_constants, MixedClass};

use crate::dyadic::DyadicError;
use crate::exponents::ExponentError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight must be positive and finite; cell {cell} has {value}")]
    NotPositive { cell: usize, value: f64 },
    #[error("p = 1 with r = ∞ gives the trivial class: v ≈ 1")]
    TrivialClass,
    #[error("{0}")]
    Exponent(String),
    #[error(transparent)]
    Exponents(#[from] ExponentError),
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error("delta-form {delta} and case-form {case} disagree")]
    FormMismatch { delta: f64, case: f64 },
    #[error("identity violated: {0}")]
    Identity(String),
}


#[cfg(test)]
mod tests;
