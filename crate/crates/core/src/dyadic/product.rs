use serde::{Deserialize, Serialize};

use super::function::GridFunction;
use super::grid::GridShape;
use super::DyadicError;

/// Two grids glued as `ℝⁿ × ℝᵐ`; cell `(i₁, i₂)` has index `i₁·cells₂ + i₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductShape {
    pub first: GridShape,
    pub second: GridShape,
}

impl ProductShape {
    pub fn new(first: GridShape, second: GridShape) -> Self {
        Self { first, second }
    }

    pub fn cells(&self) -> usize {
        self.first.cells() * self.second.cells()
    }

    pub fn cell_volume(&self) -> f64 {
        self.first.cell_volume() * self.second.cell_volume()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductFunction {
    shape: ProductShape,
    values: Vec<f64>,
}

impl ProductFunction {
    pub fn new(shape: ProductShape, values: Vec<f64>) -> Result<Self, DyadicError> {
        if values.len() != shape.cells() {
            return Err(DyadicError::Length { expected: shape.cells(), found: values.len() });
        }
        Ok(Self { shape, values })
    }

    pub fn from_fn(shape: ProductShape, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n2 = shape.second.cells();
        let values = (0..shape.cells()).map(|i| f(i / n2, i % n2)).collect();
        Self { shape, values }
    }

    pub fn constant(shape: ProductShape, c: f64) -> Self {
        Self { shape, values: vec![c; shape.cells()] }
    }

    /// `(u ⊗ v)(x₁, x₂) = u(x₁) v(x₂)`.
    pub fn tensor(u: &GridFunction, v: &GridFunction) -> Self {
        let shape = ProductShape::new(u.shape(), v.shape());
        Self::from_fn(shape, |i, j| u.values()[i] * v.values()[j])
    }

    /// Builds from one second-variable function per `x₁` cell.
    pub fn from_slices(first: GridShape, slices: &[GridFunction]) -> Result<Self, DyadicError> {
        if slices.len() != first.cells() {
            return Err(DyadicError::Length { expected: first.cells(), found: slices.len() });
        }
        let second = slices[0].shape();
        let values = slices.iter().flat_map(|s| s.values().iter().copied()).collect();
        Self::new(ProductShape::new(first, second), values)
    }

    /// Builds from one first-variable function per `x₂` cell.
    pub fn from_columns(second: GridShape, cols: &[GridFunction]) -> Result<Self, DyadicError> {
        if cols.len() != second.cells() {
            return Err(DyadicError::Length { expected: second.cells(), found: cols.len() });
        }
        let first = cols[0].shape();
        let shape = ProductShape::new(first, second);
        Ok(Self::from_fn(shape, |i, j| cols[j].values()[i]))
    }

    pub fn shape(&self) -> ProductShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.shape.second.cells() + i2]
    }

    /// `f(x₁, ·)`.
    pub fn slice(&self, i1: usize) -> GridFunction {
        let n2 = self.shape.second.cells();
        GridFunction::new(self.shape.second, self.values[i1 * n2..(i1 + 1) * n2].to_vec())
            .expect("slice length")
    }

    /// `f(·, x₂)`.
    pub fn column(&self, i2: usize) -> GridFunction {
        GridFunction::from_fn(self.shape.first, |i1| self.get(i1, i2))
    }

    pub fn slices(&self) -> impl Iterator<Item = GridFunction> + '_ {
        (0..self.shape.first.cells()).map(|i| self.slice(i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { shape: self.shape, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape, other.shape, "product shapes differ");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { shape: self.shape, values }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// The same values viewed on a single `(n+m)`-dimensional grid when both
    /// factors share a depth; used for flat norms.
    pub fn flat_values(&self) -> &[f64] {
        &self.values
    }
}
