use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::GridFunction;
use super::grid::{DyadicGrid, GridShape};
use super::DyadicError;

/// Largest shift space enumerated exhaustively.
pub const EXACT_SHIFT_CAP_BITS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShiftMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// The shifts visited by `mode`, in a fixed order.
pub fn shift_sample(shape: GridShape, mode: ShiftMode) -> Result<Vec<DyadicGrid>, DyadicError> {
    match mode {
        ShiftMode::Exact => {
            let bits = shape.d * shape.depth as usize;
            if bits > EXACT_SHIFT_CAP_BITS {
                return Err(DyadicError::TooManyShifts { bits });
            }
            Ok((0..1u64 << bits).map(|code| DyadicGrid::from_code(shape, code)).collect())
        }
        ShiftMode::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..samples).map(|_| DyadicGrid::random(shape, &mut rng)).collect())
        }
    }
}

/// `E_ω F(ω)`, averaged over all shifts or over seeded samples.
///
/// Terms are summed in sample order so the result does not depend on threading.
pub fn expectation_over_shifts<F>(shape: GridShape, mode: ShiftMode, f: F) -> Result<GridFunction, DyadicError>
where
    F: Fn(&DyadicGrid) -> GridFunction + Sync,
{
    let grids = shift_sample(shape, mode)?;
    if grids.is_empty() {
        return Err(DyadicError::TooManyShifts { bits: 0 });
    }
    let terms: Vec<GridFunction> = grids.par_iter().map(&f).collect();
    let mut acc = GridFunction::zeros(shape);
    for t in &terms {
        acc.axpy(1.0, t);
    }
    Ok(acc.scale(1.0 / terms.len() as f64))
}
