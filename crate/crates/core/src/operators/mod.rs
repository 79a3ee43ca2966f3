//! Maximal operators, bilinear model operators, sparse forms and square functions.

mod maximal;
mod model;
mod slices;
mod sparse;
mod square;

use thiserror::Error;

pub use maximal::{bilinear_maximal, hl_maximal, weighted_dyadic_maximal, Maximal};
pub use model::{
    carleson_norm, paraproduct_apply, random_paraproduct, random_shift, shift_apply, shift_coeff_bound,
    tensor_apply, tensor_apply_direct, Atom, ModelOperator, ModelSpec, ParaCoeff, ParaForm, ParaproductSpec,
    ShiftCoeff, ShiftForm, ShiftSpec, Term,
};
pub use slices::{delta2, m2};
pub use sparse::{
    sparse_form, sparse_generate, sparse_stopping, sparse_verify, SparseFamily, SparseFormValue, SparseMember, SparseViolation,
    SPARSE_AVERAGE_CONVENTION,
};
pub use square::{block_square_function, square_function};

use crate::dyadic::{Cube, DyadicError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error("coefficient {index}: slot {slot} cube is not a descendant of K at the stated complexity")]
    NotNested { index: usize, slot: usize },
    #[error("coefficient {index}: slot {slot} has the wrong Haar type {eta:?}")]
    Eta { index: usize, slot: usize, eta: Vec<u8> },
    #[error("coefficient {index}: slot {slot} needs a cancellative Haar at level {level}, which is the finest level")]
    Depth { index: usize, slot: usize, level: u32 },
    #[error("coefficient {index} at K = {cube:?}: |a| = {value} exceeds the size bound {bound}")]
    Normalization { index: usize, cube: Cube, value: f64, bound: f64 },
    #[error("Carleson sum over K₀ = {cube:?} gives {value} > 1")]
    Carleson { cube: Cube, value: f64 },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Sparse(#[from] SparseViolation),
}
