use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::family::CubeFamily;
use super::measure::Weight;
use super::WeightError;
use crate::dyadic::{DyadicGrid, GridFunction, GridShape, ProductFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightGen {
    /// `|x − center|^a` at cell centers (torus distance).
    Power { a: f64 },
    /// `(M^𝒟 μ)^δ` for a random spiky measure `μ`.
    RandomA1 { delta: f64, seed: u64 },
    /// `exp(spread·U)` with `U` uniform on `[−1, 1]`, independently per cell.
    LogUniform { spread: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedWeight {
    pub weight: Weight,
    pub params: WeightGen,
    /// Upper bound on the dyadic `A₁` constant, when the construction gives one.
    pub a1_bound: Option<f64>,
}

pub fn generate_weight(gen: &WeightGen, grid: &DyadicGrid) -> Result<GeneratedWeight, WeightError> {
    let shape = grid.shape;
    let (weight, a1_bound) = match *gen {
        WeightGen::Power { a } => (power_weight(shape, a)?, None),
        WeightGen::RandomA1 { delta, seed } => {
            let w = random_a1(grid, delta, &mut ChaCha8Rng::seed_from_u64(seed))?;
            (w, Some(random_a1_bound(delta)))
        }
        WeightGen::LogUniform { spread, seed } => {
            (log_uniform(shape, spread, &mut ChaCha8Rng::seed_from_u64(seed)), None)
        }
    };
    Ok(GeneratedWeight { weight, params: gen.clone(), a1_bound })
}

pub fn power_weight(shape: GridShape, a: f64) -> Result<Weight, WeightError> {
    if a == 0.0 {
        return Ok(Weight::one(shape));
    }
    Weight::new(GridFunction::from_fn(shape, |c| {
        let dist2: f64 = shape
            .center(c)
            .iter()
            .map(|x| {
                let t = (x - 0.5).abs();
                t.min(1.0 - t).powi(2)
            })
            .sum();
        dist2.sqrt().powf(a)
    }))
}

pub fn log_uniform<R: Rng + ?Sized>(shape: GridShape, spread: f64, rng: &mut R) -> Weight {
    Weight::new(GridFunction::from_fn(shape, |_| (spread * rng.gen_range(-1.0..=1.0)).exp()))
        .expect("exponentials are positive")
}

/// `[(M^𝒟 f)^δ]_{A₁^𝒟} ≤ (2−δ)/(1−δ)`: Kolmogorov on the local part plus the
/// constant contribution of strict ancestors.
pub fn random_a1_bound(delta: f64) -> f64 {
    (2.0 - delta) / (1.0 - delta)
}

pub fn random_a1<R: Rng + ?Sized>(grid: &DyadicGrid, delta: f64, rng: &mut R) -> Result<Weight, WeightError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(WeightError::Exponent(format!("delta = {delta} must lie in (0,1)")));
    }
    let shape = grid.shape;
    let density: Vec<f64> = (0..shape.cells())
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            (-u.ln()).powi(4)
        })
        .collect();
    let fam = CubeFamily::dyadic(grid);
    let sums = fam.sums(&density);
    let avgs: Vec<f64> = sums
        .iter()
        .zip(fam.cubes())
        .map(|(s, q)| s / q.side.pow(shape.d as u32) as f64)
        .collect();
    let m = fam.spread_max(&avgs);
    Weight::from_values(shape, m.iter().map(|v| v.powf(delta)).collect())
}

/// `u ⊗ v` on the product grid.
pub fn tensor_weight(u: &Weight, v: &Weight) -> ProductFunction {
    ProductFunction::tensor(u, v)
}
