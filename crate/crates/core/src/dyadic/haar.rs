use super::function::GridFunction;
use super::grid::{Cube, DiscreteCube, DyadicGrid};
use super::DyadicError;
use crate::weights::BaseMeasure;

/// `⨍_Q f dμ` over the cells of a geometric cube.
pub fn average_over(f: &GridFunction, q: &DiscreteCube, mu: &BaseMeasure) -> Result<f64, DyadicError> {
    let shape = f.shape();
    let (mut num, mut den) = (0.0, 0.0);
    for c in q.cells(&shape) {
        let m = mu.masses()[c];
        num += f.values()[c] * m;
        den += m;
    }
    if den <= 0.0 {
        return Err(DyadicError::NullMeasure);
    }
    Ok(num / den)
}

/// `⨍_{I+ω} f dμ`.
pub fn cell_average(
    f: &GridFunction,
    grid: &DyadicGrid,
    cube: &Cube,
    mu: &BaseMeasure,
) -> Result<f64, DyadicError> {
    grid.check_cube(cube)?;
    average_over(f, &grid.realize(cube), mu)
}

/// Lebesgue averages of `f` over every level-`ℓ` cube, indexed by linear index.
pub fn level_averages(f: &GridFunction, grid: &DyadicGrid, level: u32) -> Vec<f64> {
    let labels = grid.level_labels(level);
    let count = 1usize << (grid.d() as u32 * level);
    let mut sums = vec![0.0; count];
    for (c, &lab) in labels.iter().enumerate() {
        sums[lab] += f.values()[c];
    }
    let per = (f.len() / count) as f64;
    sums.iter_mut().for_each(|s| *s /= per);
    sums
}

/// `E_ℓ f`: the function equal on each level-`ℓ` cube to its average.
pub fn conditional_expectation(f: &GridFunction, grid: &DyadicGrid, level: u32) -> GridFunction {
    let avgs = level_averages(f, grid, level);
    let labels = grid.level_labels(level);
    GridFunction::from_fn(f.shape(), |c| avgs[labels[c]])
}

/// The `L²`-normalized Haar function `h_I^η` of the lattice `grid`.
pub fn haar(grid: &DyadicGrid, cube: &Cube, eta: &[u8]) -> Result<GridFunction, DyadicError> {
    let mut f = GridFunction::zeros(grid.shape);
    for (c, v) in haar_support(grid, cube, eta)? {
        f.values_mut()[c] = v;
    }
    Ok(f)
}

/// Nonzero values of `h_I^η` as `(cell, value)` pairs.
pub fn haar_support(grid: &DyadicGrid, cube: &Cube, eta: &[u8]) -> Result<Vec<(usize, f64)>, DyadicError> {
    grid.check_cube(cube)?;
    if eta.len() != grid.d() || eta.iter().any(|&e| e > 1) {
        return Err(DyadicError::Eta(eta.to_vec()));
    }
    let cancellative = eta.contains(&1);
    if cancellative && cube.level >= grid.depth() {
        return Err(DyadicError::Depth { level: cube.level, needed: 1, depth: grid.depth() });
    }
    let q = grid.realize(cube);
    let shape = grid.shape;
    let n = shape.n();
    let norm = cube.volume().powf(-0.5);
    let half = q.side / 2;
    Ok(q.cells(&shape)
        .into_iter()
        .map(|c| {
            let x = shape.coords(c);
            let flips = (0..shape.d).filter(|&k| eta[k] == 1 && (x[k] + n - q.origin[k]) % n >= half).count();
            (c, if flips % 2 == 1 { -norm } else { norm })
        })
        .collect())
}

/// All `η ∈ {0,1}^d ∖ {0}`.
pub fn cancellative_etas(d: usize) -> impl Iterator<Item = Vec<u8>> {
    (1..1usize << d).map(move |b| (0..d).map(|k| ((b >> (d - 1 - k)) & 1) as u8).collect())
}

fn check_depth(grid: &DyadicGrid, cube: &Cube, k: u32) -> Result<(), DyadicError> {
    grid.check_cube(cube)?;
    if cube.level + k + 1 > grid.depth() {
        return Err(DyadicError::Depth { level: cube.level, needed: k + 1, depth: grid.depth() });
    }
    Ok(())
}

/// `Δ_I f = Σ_{I′ ∈ ch(I)} ⟨f⟩_{I′} 1_{I′} − ⟨f⟩_I 1_I`.
pub fn martingale_diff(f: &GridFunction, grid: &DyadicGrid, cube: &Cube) -> Result<GridFunction, DyadicError> {
    block_diff(f, grid, cube, 0)
}

/// `Δ_{I,k} f = Σ_{J^{(k)} = I} Δ_J f`.
///
/// On `I` this telescopes to `E_{ℓ+k+1} f − E_{ℓ+k} f`.
pub fn block_diff(f: &GridFunction, grid: &DyadicGrid, cube: &Cube, k: u32) -> Result<GridFunction, DyadicError> {
    check_depth(grid, cube, k)?;
    let shape = f.shape();
    let fine = cube.level + k + 1;
    let lower = level_averages(f, grid, fine);
    let upper = level_averages(f, grid, fine - 1);
    let mut out = GridFunction::zeros(shape);
    for c in grid.cube_cells(cube) {
        let lo = grid.cube_containing(c, fine).linear_index();
        let up = grid.cube_containing(c, fine - 1).linear_index();
        out.values_mut()[c] = lower[lo] - upper[up];
    }
    Ok(out)
}

/// Per-level martingale differences: entry `ℓ` is `Σ_{level(J)=ℓ} Δ_J f`.
pub fn level_differences(f: &GridFunction, grid: &DyadicGrid) -> Vec<GridFunction> {
    let e: Vec<GridFunction> = (0..=grid.depth()).map(|l| conditional_expectation(f, grid, l)).collect();
    e.windows(2).map(|w| w[1].sub(&w[0])).collect()
}

/// `⟨f⟩_{I₀} 1_{I₀} + Σ_{J ⊆ I₀} Δ_J f`, restricted to `I₀`; equals `f` there.
pub fn telescope(f: &GridFunction, grid: &DyadicGrid, top: &Cube) -> Result<GridFunction, DyadicError> {
    grid.check_cube(top)?;
    let shape = f.shape();
    let cells = grid.cube_cells(top);
    let mean = cells.iter().map(|&c| f.values()[c]).sum::<f64>() / cells.len() as f64;
    let mut out = GridFunction::zeros(shape);
    for &c in &cells {
        out.values_mut()[c] = mean;
    }
    for level in top.level..grid.depth() {
        for j in grid.descendants(top, level - top.level) {
            out.axpy(1.0, &martingale_diff(f, grid, &j)?);
        }
    }
    Ok(out)
}
