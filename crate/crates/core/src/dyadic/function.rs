use serde::{Deserialize, Serialize};

use super::grid::{DiscreteCube, DyadicGrid, GridShape};
use super::DyadicError;

/// A real function, constant on each finest cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    shape: GridShape,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self, DyadicError> {
        if values.len() != shape.cells() {
            return Err(DyadicError::Length { expected: shape.cells(), found: values.len() });
        }
        Ok(Self { shape, values })
    }

    pub fn constant(shape: GridShape, c: f64) -> Self {
        Self { shape, values: vec![c; shape.cells()] }
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn from_fn(shape: GridShape, f: impl FnMut(usize) -> f64) -> Self {
        Self { shape, values: (0..shape.cells()).map(f).collect() }
    }

    /// `1_Q`.
    pub fn indicator(shape: GridShape, q: &DiscreteCube) -> Self {
        let mut f = Self::zeros(shape);
        for c in q.cells(&shape) {
            f.values[c] = 1.0;
        }
        f
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { shape: self.shape, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape, other.shape, "grid shapes differ");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { shape: self.shape, values }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn powf(&self, a: f64) -> Self {
        self.map(|v| v.powf(a))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a / b)
    }

    /// `y += c·x` in place.
    pub fn axpy(&mut self, c: f64, x: &Self) {
        for (y, &v) in self.values.iter_mut().zip(&x.values) {
            *y += c * v;
        }
    }

    /// Lebesgue integral over the unit torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.shape.cell_volume()
    }

    /// `⟨f, g⟩ = ∫ f g`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "grid shapes differ");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
            * self.shape.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self, grid: Option<&DyadicGrid>) -> GridFunctionJson {
        let omega = grid
            .map(|g| g.omega.clone())
            .unwrap_or_else(|| vec![vec![0; self.shape.d]; self.shape.depth as usize]);
        GridFunctionJson {
            d: self.shape.d,
            depth: self.shape.depth,
            omega,
            values: self.values.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn from_json(j: &GridFunctionJson) -> Result<(Self, DyadicGrid), DyadicError> {
        let shape = GridShape::new(j.d, j.depth)?;
        let grid = DyadicGrid::new(shape, j.omega.clone())?;
        let values = j
            .values
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| DyadicError::Parse(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Self::new(shape, values)?, grid))
    }
}

/// Wire format: header `{d, L, omega}` plus row-major values as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionJson {
    pub d: usize,
    #[serde(rename = "L")]
    pub depth: u32,
    pub omega: Vec<Vec<u8>>,
    pub values: Vec<String>,
}
