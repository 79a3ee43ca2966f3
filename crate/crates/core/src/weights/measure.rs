use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::WeightError;
use crate::dyadic::{GridFunction, GridShape};

/// A strictly positive grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(f: GridFunction) -> Result<Self, WeightError> {
        if let Some((cell, &v)) = f.values().iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(WeightError::NotPositive { cell, value: v });
        }
        Ok(Self(f))
    }

    pub fn from_values(shape: GridShape, values: Vec<f64>) -> Result<Self, WeightError> {
        Self::new(GridFunction::new(shape, values)?)
    }

    pub fn one(shape: GridShape) -> Self {
        Self(GridFunction::constant(shape, 1.0))
    }

    pub fn as_function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }

    /// `w^a`, again a weight.
    pub fn pow(&self, a: f64) -> Weight {
        Weight(self.0.powf(a))
    }

    pub fn mul_w(&self, other: &Weight) -> Weight {
        Weight(self.0.mul(&other.0))
    }

    pub fn recip(&self) -> Weight {
        self.pow(-1.0)
    }
}

impl Deref for Weight {
    type Target = GridFunction;

    fn deref(&self) -> &GridFunction {
        &self.0
    }
}

/// Product of weights, `∏ wᵢ`.
pub fn product(ws: &[Weight]) -> Weight {
    let shape = ws[0].shape();
    let mut acc = GridFunction::constant(shape, 1.0);
    for w in ws {
        acc = acc.mul(w);
    }
    Weight(acc)
}

/// Positive cell masses with their measured doubling constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseMeasure {
    shape: GridShape,
    masses: Vec<f64>,
    doubling_constant: f64,
}

impl BaseMeasure {
    pub fn lebesgue(shape: GridShape) -> Self {
        Self { shape, masses: vec![shape.cell_volume(); shape.cells()], doubling_constant: 2f64.powi(shape.d as i32) }
    }

    pub fn from_masses(shape: GridShape, masses: Vec<f64>) -> Result<Self, WeightError> {
        if masses.len() != shape.cells() {
            return Err(WeightError::Grid(crate::dyadic::DyadicError::Length {
                expected: shape.cells(),
                found: masses.len(),
            }));
        }
        if let Some((cell, &v)) = masses.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(WeightError::NotPositive { cell, value: v });
        }
        let doubling_constant = doubling_constant(shape, &masses);
        Ok(Self { shape, masses, doubling_constant })
    }

    /// `w dx`.
    pub fn from_weight(w: &Weight) -> Self {
        let vol = w.shape().cell_volume();
        Self::from_masses(w.shape(), w.values().iter().map(|v| v * vol).collect())
            .expect("weights are positive")
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn doubling_constant(&self) -> f64 {
        self.doubling_constant
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// `max μ(2Q)/μ(Q)` over all periodic cell-aligned cubes, where `2Q` is the
/// cube of side `min(2s, n)` sharing the center of `Q` up to half a cell.
fn doubling_constant(shape: GridShape, masses: &[f64]) -> f64 {
    let n = shape.n();
    let table = super::family::PeriodicSums::new(shape, masses);
    let mut worst: f64 = 1.0;
    for s in 1..=n {
        let big = (2 * s).min(n);
        let back = (big - s) / 2;
        for o in 0..shape.cells() {
            let oc = shape.coords(o);
            let inner = table.box_sum(&oc, s);
            let shifted: Vec<usize> = oc.iter().map(|&x| (x + n - back) % n).collect();
            let outer = table.box_sum(&shifted, big);
            worst = worst.max(outer / inner);
        }
    }
    worst
}
