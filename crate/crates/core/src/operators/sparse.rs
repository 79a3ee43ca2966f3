use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::OperatorError;
use crate::dyadic::{Cube, DyadicGrid, GridFunction};
use crate::exponents::ExponentVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMember {
    pub cube: Cube,
    /// The finest cells of `E_Q`.
    pub major: Vec<usize>,
}

/// Cubes of one lattice, each owning a disjoint major subset `E_Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub grid: DyadicGrid,
    pub zeta: f64,
    pub members: Vec<SparseMember>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseViolation {
    #[error("sparsity constant {0} outside (0,1)")]
    Zeta(f64),
    #[error("cube {0:?} is not in the lattice")]
    BadCube(Cube),
    #[error("cube {0:?} appears twice")]
    Duplicate(Cube),
    #[error("cell {cell} of E_Q lies outside cube {cube:?}")]
    Outside { cube: Cube, cell: usize },
    #[error("cube {cube:?}: |E_Q| = {size} cells, needs {needed}")]
    TooSmall { cube: Cube, size: usize, needed: f64 },
    #[error("cell {cell} belongs to E_Q for both {first:?} and {second:?}")]
    Overlap { first: Cube, second: Cube, cell: usize },
}

impl SparseFamily {
    pub fn cubes(&self) -> impl Iterator<Item = &Cube> {
        self.members.iter().map(|m| &m.cube)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Checks `E_Q ⊆ Q`, `|E_Q| ≥ ζ|Q|` and pairwise disjointness.
    pub fn verify(&self) -> Result<(), SparseViolation> {
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(SparseViolation::Zeta(self.zeta));
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.grid.shape.cells()];
        let mut seen = HashSet::new();
        for (idx, m) in self.members.iter().enumerate() {
            if self.grid.check_cube(&m.cube).is_err() {
                return Err(SparseViolation::BadCube(m.cube.clone()));
            }
            if !seen.insert(&m.cube) {
                return Err(SparseViolation::Duplicate(m.cube.clone()));
            }
            let q = self.grid.realize(&m.cube);
            let mut distinct = HashSet::new();
            for &cell in &m.major {
                if cell >= owner.len() || !q.contains(&self.grid.shape, cell) {
                    return Err(SparseViolation::Outside { cube: m.cube.clone(), cell });
                }
                if !distinct.insert(cell) {
                    continue;
                }
                if let Some(prev) = owner[cell] {
                    return Err(SparseViolation::Overlap {
                        first: self.members[prev].cube.clone(),
                        second: m.cube.clone(),
                        cell,
                    });
                }
                owner[cell] = Some(idx);
            }
            let needed = self.zeta * q.side.pow(self.grid.d() as u32) as f64;
            if (distinct.len() as f64) < needed {
                return Err(SparseViolation::TooSmall { cube: m.cube.clone(), size: distinct.len(), needed });
            }
        }
        Ok(())
    }
}

pub fn sparse_verify(s: &SparseFamily) -> bool {
    s.verify().is_ok()
}

/// Greedy top-down selection.
///
/// Each lattice cube is tried with probability `density`; it is kept when enough of
/// its cells are still free, and then reserves a random `ζ`-fraction of them.
pub fn sparse_generate(grid: &DyadicGrid, zeta: f64, density: f64, seed: u64) -> Result<SparseFamily, OperatorError> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(OperatorError::Sparse(SparseViolation::Zeta(zeta)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = vec![true; grid.shape.cells()];
    let mut members = Vec::new();
    for cube in grid.all_cubes() {
        if !rng.gen_bool(density.clamp(0.0, 1.0)) {
            continue;
        }
        let mut avail: Vec<usize> = grid.cube_cells(&cube).into_iter().filter(|&c| free[c]).collect();
        let size = 1usize << (grid.d() as u32 * (grid.depth() - cube.level));
        let needed = (zeta * size as f64).ceil() as usize;
        if avail.len() < needed {
            continue;
        }
        avail.shuffle(&mut rng);
        avail.truncate(needed);
        avail.sort_unstable();
        for &c in &avail {
            free[c] = false;
        }
        members.push(SparseMember { cube, major: avail });
    }
    Ok(SparseFamily { grid: grid.clone(), zeta, members })
}

/// Generalized averages: slot `i` contributes `⟨|fᵢ|^{rᵢ}⟩_Q^{1/rᵢ}`.
pub const SPARSE_AVERAGE_CONVENTION: &str = "L^{r_i} averages <|f_i|^{r_i}>_Q^{1/r_i}";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseFormValue {
    pub value: f64,
    pub convention: String,
}

/// `Λ_{𝒮,r⃗}(f⃗, h) = Σ_{Q∈𝒮} |Q| ∏ᵢ ⟨|fᵢ|^{rᵢ}⟩_Q^{1/rᵢ} · ⟨|h|^{r_{m+1}}⟩_Q^{1/r_{m+1}}`.
pub fn sparse_form(
    s: &SparseFamily,
    r: &ExponentVector,
    fs: &[GridFunction],
    h: &GridFunction,
) -> Result<SparseFormValue, OperatorError> {
    if r.len() != fs.len() + 1 {
        return Err(OperatorError::Shape(format!("{} functions need {} exponents, got {}", fs.len(), fs.len() + 1, r.len())));
    }
    let shape = s.grid.shape;
    if fs.iter().chain(std::iter::once(h)).any(|f| f.shape() != shape) {
        return Err(OperatorError::Shape("function grid differs from the family's grid".into()));
    }
    let exps: Vec<f64> = r.iter().map(|e| e.to_f64()).collect();
    let mut value = 0.0;
    for m in &s.members {
        let cells = s.grid.cube_cells(&m.cube);
        let n = cells.len() as f64;
        let avg = |f: &GridFunction, p: f64| {
            (cells.iter().map(|&c| f.values()[c].abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
        };
        let prod: f64 = fs.iter().chain(std::iter::once(h)).zip(&exps).map(|(f, &p)| avg(f, p)).product();
        value += m.cube.volume() * prod;
    }
    Ok(SparseFormValue { value, convention: SPARSE_AVERAGE_CONVENTION.to_string() })
}

/// Principal cubes for `f⃗`: below each selected `Q`, the maximal `P` with
/// `⟨|fᵢ|⟩_P > 2m⟨|fᵢ|⟩_Q` for some `i` are selected next.
///
/// The children of `Q` cover at most half of it, so the family is `1/2`-sparse with
/// `E_Q = Q ∖ ⋃ children`.
pub fn sparse_stopping(grid: &DyadicGrid, fs: &[GridFunction]) -> Result<SparseFamily, OperatorError> {
    let shape = grid.shape;
    if fs.is_empty() || fs.iter().any(|f| f.shape() != shape) {
        return Err(OperatorError::Shape("stopping family needs functions on the grid".into()));
    }
    let depth = grid.depth();
    // per level, per cube label: ⟨|fᵢ|⟩
    let avgs: Vec<Vec<Vec<f64>>> = (0..=depth)
        .map(|l| fs.iter().map(|f| crate::dyadic::level_averages(&f.abs(), grid, l)).collect())
        .collect();
    let labels: Vec<Vec<usize>> = (0..=depth).map(|l| grid.level_labels(l)).collect();
    let lambda = 2.0 * fs.len() as f64;
    let mut members = Vec::new();
    let mut stack = vec![Cube::top(grid.d())];
    while let Some(q) = stack.pop() {
        let qi = q.linear_index();
        let thresholds: Vec<f64> = (0..fs.len()).map(|i| lambda * avgs[q.level as usize][i][qi]).collect();
        let mut major = Vec::new();
        let mut children: Vec<Cube> = Vec::new();
        for c in grid.cube_cells(&q) {
            let stop = (q.level + 1..=depth).find(|&l| {
                let li = labels[l as usize][c];
                (0..fs.len()).any(|i| avgs[l as usize][i][li] > thresholds[i])
            });
            match stop {
                Some(l) => {
                    let p = grid.cube_containing(c, l);
                    if !children.contains(&p) {
                        children.push(p);
                    }
                }
                None => major.push(c),
            }
        }
        major.sort_unstable();
        members.push(SparseMember { cube: q, major });
        stack.extend(children);
    }
    Ok(SparseFamily { grid: grid.clone(), zeta: 0.5, members })
}
