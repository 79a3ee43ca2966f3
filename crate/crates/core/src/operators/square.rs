use super::maximal::Maximal;
use super::OperatorError;
use crate::dyadic::{block_diff, level_differences, DyadicGrid, GridFunction};

/// `(Σ_J |Δ_J g|²)^{1/2}` over all lattice cubes `J` with a finer level below them.
pub fn square_function(g: &GridFunction, grid: &DyadicGrid) -> GridFunction {
    let mut acc = GridFunction::zeros(g.shape());
    for diff in level_differences(g, grid) {
        acc = acc.zip_with(&diff, |a, b| a + b * b);
    }
    acc.map(f64::sqrt)
}

/// `(Σ_I (M Δ_{I,k} g)²)^{1/2}`.
pub fn block_square_function(
    g: &GridFunction,
    grid: &DyadicGrid,
    k: u32,
    maximal: &Maximal,
) -> Result<GridFunction, OperatorError> {
    if maximal.family().shape() != g.shape() {
        return Err(OperatorError::Shape("maximal operator lives on another grid".into()));
    }
    let mut acc = vec![0.0; g.len()];
    if k + 1 > grid.depth() {
        return Ok(GridFunction::zeros(g.shape()));
    }
    for level in 0..grid.depth() - k {
        for cube in grid.cubes_at(level) {
            let m = maximal.apply_values(block_diff(g, grid, &cube, k)?.values());
            acc.iter_mut().zip(&m).for_each(|(a, x)| *a += x * x);
        }
    }
    Ok(GridFunction::new(g.shape(), acc.into_iter().map(f64::sqrt).collect())?)
}
