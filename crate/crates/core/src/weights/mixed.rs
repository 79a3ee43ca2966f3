use serde::{Deserialize, Serialize};

use super::constants::{ap_constant, multilinear_ap_constant};
use super::family::CubeFamily;
use super::measure::{BaseMeasure, Weight};
use super::WeightError;
use crate::dyadic::ProductFunction;
use crate::exponents::ExponentVector;

/// Slice constants of a weight pair on a product grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedClass {
    /// `max_{x₂} [(w₁(·,x₂), w₂(·,x₂))]_{A_{p⃗}}` over the first factor.
    pub bilinear_first: f64,
    /// `max_{x₁} [w₁(x₁,·)^{p₁}]_{A_{p₁}}` over the second factor.
    pub power_second_1: f64,
    /// `max_{x₁} [w₂(x₁,·)^{p₂}]_{A_{p₂}}`.
    pub power_second_2: f64,
}

impl MixedClass {
    pub fn max(&self) -> f64 {
        self.bilinear_first.max(self.power_second_1).max(self.power_second_2)
    }
}

fn positive(f: &ProductFunction) -> Result<(), WeightError> {
    if let Some((cell, &v)) = f.values().iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(WeightError::NotPositive { cell, value: v });
    }
    Ok(())
}

pub fn mixed_class_constants(
    w1: &ProductFunction,
    w2: &ProductFunction,
    p: &ExponentVector,
    fam1: &CubeFamily,
    fam2: &CubeFamily,
) -> Result<MixedClass, WeightError> {
    if p.len() != 2 || p.iter().any(|e| e.is_infinite() || e.to_f64() <= 1.0) {
        return Err(WeightError::Exponent(format!("mixed class needs 1 < p₁, p₂ < ∞, got {p}")));
    }
    if w1.shape() != w2.shape() || fam1.shape() != w1.shape().first || fam2.shape() != w1.shape().second {
        return Err(WeightError::Exponent("product grid and families do not match".into()));
    }
    positive(w1)?;
    positive(w2)?;
    let shape = w1.shape();
    let mut bilinear_first: f64 = 0.0;
    for j in 0..shape.second.cells() {
        let pair = [Weight::new(w1.column(j))?, Weight::new(w2.column(j))?];
        bilinear_first = bilinear_first.max(multilinear_ap_constant(&pair, p, fam1)?.constant);
    }
    let leb = BaseMeasure::lebesgue(shape.second);
    let mut power = [0.0f64; 2];
    for i in 0..shape.first.cells() {
        for (k, w) in [w1, w2].into_iter().enumerate() {
            let pk = p.get(k);
            let slice = Weight::new(w.slice(i))?.pow(pk.to_f64());
            power[k] = power[k].max(ap_constant(&slice, pk, &leb, fam2)?.constant);
        }
    }
    Ok(MixedClass { bilinear_first, power_second_1: power[0], power_second_2: power[1] })
}
