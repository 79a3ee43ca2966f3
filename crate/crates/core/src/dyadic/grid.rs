use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DyadicError;

/// Cell geometry of the torus `[0,1)^d` cut into `2^L` cells per side.
///
/// Cells are numbered row-major with the last coordinate fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub d: usize,
    #[serde(rename = "L")]
    pub depth: u32,
}

impl GridShape {
    pub fn new(d: usize, depth: u32) -> Result<Self, DyadicError> {
        if d == 0 || d * depth as usize > 24 {
            return Err(DyadicError::Shape(format!("d={d}, L={depth}")));
        }
        Ok(Self { d, depth })
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        1 << self.depth
    }

    pub fn cells(&self) -> usize {
        1 << (self.d as u32 * self.depth)
    }

    /// Lebesgue measure of a finest cell.
    pub fn cell_volume(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let n = self.n();
        let mut c = vec![0; self.d];
        for k in (0..self.d).rev() {
            c[k] = idx % n;
            idx /= n;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        let n = self.n();
        coords.iter().fold(0, |acc, &c| acc * n + (c % n))
    }

    /// Center of a cell in `[0,1)^d`.
    pub fn center(&self, idx: usize) -> Vec<f64> {
        let n = self.n() as f64;
        self.coords(idx).into_iter().map(|c| (c as f64 + 0.5) / n).collect()
    }
}

/// A lattice address: level `ℓ` and coordinates in `[0, 2^ℓ)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub level: u32,
    pub coords: Vec<usize>,
}

impl Cube {
    pub fn new(level: u32, coords: Vec<usize>) -> Self {
        Self { level, coords }
    }

    pub fn top(d: usize) -> Self {
        Self { level: 0, coords: vec![0; d] }
    }

    pub fn side_len(&self) -> f64 {
        (0.5f64).powi(self.level as i32)
    }

    pub fn volume(&self) -> f64 {
        self.side_len().powi(self.coords.len() as i32)
    }

    /// Linear index of this cube among the `2^{dℓ}` cubes of its level.
    pub fn linear_index(&self) -> usize {
        let side = 1usize << self.level;
        self.coords.iter().fold(0, |acc, &c| acc * side + c)
    }

    pub fn from_linear(level: u32, d: usize, mut idx: usize) -> Cube {
        let side = 1usize << level;
        let mut coords = vec![0; d];
        for k in (0..d).rev() {
            coords[k] = idx % side;
            idx /= side;
        }
        Cube { level, coords }
    }
}

/// A geometric cube on the discrete torus: corner cell and side in cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteCube {
    pub origin: Vec<usize>,
    pub side: usize,
}

impl DiscreteCube {
    /// Finest cells covered, wrapping periodically, in row-major local order.
    pub fn cells(&self, shape: &GridShape) -> Vec<usize> {
        let n = shape.n();
        let d = shape.d;
        let count = self.side.pow(d as u32);
        let mut out = Vec::with_capacity(count);
        let mut local = vec![0usize; d];
        for _ in 0..count {
            let idx = (0..d).fold(0, |acc, k| acc * n + (self.origin[k] + local[k]) % n);
            out.push(idx);
            for k in (0..d).rev() {
                local[k] += 1;
                if local[k] < self.side {
                    break;
                }
                local[k] = 0;
            }
        }
        out
    }

    pub fn contains(&self, shape: &GridShape, cell: usize) -> bool {
        let n = shape.n();
        shape
            .coords(cell)
            .iter()
            .zip(&self.origin)
            .all(|(&x, &o)| (x + n - o) % n < self.side)
    }

    pub fn volume(&self, shape: &GridShape) -> f64 {
        (self.side as f64 / shape.n() as f64).powi(shape.d as i32)
    }
}

/// A dyadic lattice on the torus, shifted by `ω ∈ ({0,1}^d)^L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicGrid {
    #[serde(flatten)]
    pub shape: GridShape,
    /// `omega[i-1]` is `ω_i`.
    pub omega: Vec<Vec<u8>>,
}

impl DyadicGrid {
    pub fn standard(shape: GridShape) -> Self {
        Self { shape, omega: vec![vec![0; shape.d]; shape.depth as usize] }
    }

    pub fn new(shape: GridShape, omega: Vec<Vec<u8>>) -> Result<Self, DyadicError> {
        let ok = omega.len() == shape.depth as usize
            && omega.iter().all(|w| w.len() == shape.d && w.iter().all(|&b| b <= 1));
        if !ok {
            return Err(DyadicError::Shape(format!(
                "omega must be {} vectors in {{0,1}}^{}",
                shape.depth, shape.d
            )));
        }
        Ok(Self { shape, omega })
    }

    /// The shift with bits taken from `code` (`ω_1` in the high bits).
    pub fn from_code(shape: GridShape, code: u64) -> Self {
        let bits = shape.d * shape.depth as usize;
        let omega = (0..shape.depth as usize)
            .map(|i| {
                (0..shape.d)
                    .map(|k| ((code >> (bits - 1 - (i * shape.d + k))) & 1) as u8)
                    .collect()
            })
            .collect();
        Self { shape, omega }
    }

    pub fn random<R: Rng + ?Sized>(shape: GridShape, rng: &mut R) -> Self {
        let omega = (0..shape.depth)
            .map(|_| (0..shape.d).map(|_| rng.gen_range(0..=1u8)).collect())
            .collect();
        Self { shape, omega }
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn depth(&self) -> u32 {
        self.shape.depth
    }

    /// Translation of level-`ℓ` cubes in cells: `Σ_{i>ℓ} 2^{L−i} ω_i`.
    pub fn level_offset(&self, level: u32) -> Vec<usize> {
        let l = self.shape.depth;
        let n = self.shape.n();
        (0..self.shape.d)
            .map(|k| {
                (level + 1..=l)
                    .map(|i| (1usize << (l - i)) * self.omega[i as usize - 1][k] as usize)
                    .sum::<usize>()
                    % n
            })
            .collect()
    }

    pub fn check_cube(&self, cube: &Cube) -> Result<(), DyadicError> {
        let side = 1usize << cube.level.min(63);
        if cube.level > self.shape.depth
            || cube.coords.len() != self.shape.d
            || cube.coords.iter().any(|&c| c >= side)
        {
            return Err(DyadicError::BadCube(cube.clone()));
        }
        Ok(())
    }

    /// `I + ω` as a geometric cube.
    pub fn realize(&self, cube: &Cube) -> DiscreteCube {
        let side = 1usize << (self.shape.depth - cube.level);
        let n = self.shape.n();
        let off = self.level_offset(cube.level);
        let origin = cube.coords.iter().zip(&off).map(|(&c, &o)| (c * side + o) % n).collect();
        DiscreteCube { origin, side }
    }

    pub fn cube_cells(&self, cube: &Cube) -> Vec<usize> {
        self.realize(cube).cells(&self.shape)
    }

    /// The level-`ℓ` cube of this lattice containing `cell`.
    pub fn cube_containing(&self, cell: usize, level: u32) -> Cube {
        let side = 1usize << (self.shape.depth - level);
        let n = self.shape.n();
        let off = self.level_offset(level);
        let coords = self
            .shape
            .coords(cell)
            .iter()
            .zip(&off)
            .map(|(&x, &o)| ((x + n - o) % n) / side)
            .collect();
        Cube { level, coords }
    }

    /// The lattice ancestor `k` levels up.
    ///
    /// Shifted lattices stay nested, but ancestry is geometric: it is not `coords >> k`.
    pub fn ancestor(&self, cube: &Cube, k: u32) -> Option<Cube> {
        (k <= cube.level).then(|| {
            let corner = self.shape.index(&self.realize(cube).origin);
            self.cube_containing(corner, cube.level - k)
        })
    }

    pub fn parent(&self, cube: &Cube) -> Option<Cube> {
        self.ancestor(cube, 1)
    }

    /// The `2^d` lattice children, or none at the finest level.
    pub fn children(&self, cube: &Cube) -> Vec<Cube> {
        if cube.level >= self.shape.depth {
            return Vec::new();
        }
        let q = self.realize(cube);
        let half = q.side / 2;
        let d = self.shape.d;
        (0..1usize << d)
            .map(|bits| {
                let corner: Vec<usize> =
                    (0..d).map(|k| q.origin[k] + half * ((bits >> (d - 1 - k)) & 1)).collect();
                self.cube_containing(self.shape.index(&corner), cube.level + 1)
            })
            .collect()
    }

    /// All lattice descendants exactly `k` levels below.
    pub fn descendants(&self, cube: &Cube, k: u32) -> Vec<Cube> {
        let mut out = vec![cube.clone()];
        for _ in 0..k {
            out = out.iter().flat_map(|c| self.children(c)).collect();
        }
        out
    }

    /// `inner ⊆ outer` as lattice cubes.
    pub fn contains(&self, outer: &Cube, inner: &Cube) -> bool {
        inner.level >= outer.level && self.ancestor(inner, inner.level - outer.level).as_ref() == Some(outer)
    }

    /// For each cell, the linear index of its level-`ℓ` cube.
    pub fn level_labels(&self, level: u32) -> Vec<usize> {
        (0..self.shape.cells())
            .map(|c| self.cube_containing(c, level).linear_index())
            .collect()
    }

    pub fn cubes_at(&self, level: u32) -> impl Iterator<Item = Cube> + '_ {
        let d = self.shape.d;
        (0..1usize << (d as u32 * level)).map(move |i| Cube::from_linear(level, d, i))
    }

    /// Every lattice cube, coarse to fine.
    pub fn all_cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..=self.shape.depth).flat_map(move |l| self.cubes_at(l))
    }
}

/// `I + ω` for a cube of the standard lattice.
pub fn shifted_cube(cube: &Cube, grid: &DyadicGrid) -> DiscreteCube {
    grid.realize(cube)
}
