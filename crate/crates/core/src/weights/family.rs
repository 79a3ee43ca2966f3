use serde::{Deserialize, Serialize};

use crate::dyadic::{DiscreteCube, DyadicGrid, GridShape};

/// Periodic box sums from a prefix table over the doubled torus.
pub(crate) struct PeriodicSums {
    shape: GridShape,
    ext: usize,
    prefix: Vec<f64>,
}

impl PeriodicSums {
    pub(crate) fn new(shape: GridShape, values: &[f64]) -> Self {
        let n = shape.n();
        let d = shape.d;
        let ext = 2 * n + 1;
        let size = ext.pow(d as u32);
        let mut prefix = vec![0.0; size];
        // fill prefix[x+1] = value at x mod n, then integrate along each axis
        for idx in 0..size {
            let mut rem = idx;
            let mut cell = 0;
            let mut zero = false;
            let mut stride_pos = Vec::with_capacity(d);
            for _ in 0..d {
                stride_pos.push(rem % ext);
                rem /= ext;
            }
            stride_pos.reverse();
            for &x in &stride_pos {
                if x == 0 {
                    zero = true;
                    break;
                }
                cell = cell * n + (x - 1) % n;
            }
            if !zero {
                prefix[idx] = values[cell];
            }
        }
        let mut stride = 1;
        for _ in 0..d {
            for idx in 0..size {
                if (idx / stride) % ext != 0 {
                    prefix[idx] += prefix[idx - stride];
                }
            }
            stride *= ext;
        }
        Self { shape, ext, prefix }
    }

    fn at(&self, x: &[usize]) -> f64 {
        self.prefix[x.iter().fold(0, |acc, &c| acc * self.ext + c)]
    }

    /// Sum over the box with corner `origin` (cells) and side `s ≤ n`.
    pub(crate) fn box_sum(&self, origin: &[usize], s: usize) -> f64 {
        let d = self.shape.d;
        let mut total = 0.0;
        let mut corner = vec![0; d];
        for bits in 0..1usize << d {
            let mut sign = 1.0;
            for k in 0..d {
                if (bits >> k) & 1 == 1 {
                    corner[k] = origin[k] + s;
                } else {
                    corner[k] = origin[k];
                    sign = -sign;
                }
            }
            total += sign * self.at(&corner);
        }
        total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMode {
    Dyadic,
    /// Every cell-aligned cube that does not wrap around the torus.
    AllDiscrete,
    /// Every cell-aligned cube, wrapping periodically.
    AllDiscretePeriodic,
}

impl FamilyMode {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyMode::Dyadic => "dyadic",
            FamilyMode::AllDiscrete => "all_discrete_cubes",
            FamilyMode::AllDiscretePeriodic => "all_discrete_cubes_periodic",
        }
    }
}

#[derive(Clone, Debug)]
enum Layout {
    Dyadic { grid: DyadicGrid, labels: Vec<Vec<usize>>, starts: Vec<usize> },
    Boxes { origin_index: Vec<usize>, by_side: Vec<Vec<usize>> },
}

/// A finite family of cubes over which suprema are taken.
#[derive(Clone, Debug)]
pub struct CubeFamily {
    mode: FamilyMode,
    shape: GridShape,
    cubes: Vec<DiscreteCube>,
    layout: Layout,
}

impl CubeFamily {
    pub fn dyadic(grid: &DyadicGrid) -> Self {
        let shape = grid.shape;
        let mut cubes = Vec::new();
        let mut labels = Vec::new();
        let mut starts = Vec::new();
        for level in 0..=grid.depth() {
            starts.push(cubes.len());
            cubes.extend(grid.cubes_at(level).map(|q| grid.realize(&q)));
            labels.push(grid.level_labels(level));
        }
        Self {
            mode: FamilyMode::Dyadic,
            shape,
            cubes,
            layout: Layout::Dyadic { grid: grid.clone(), labels, starts },
        }
    }

    pub fn all_discrete(shape: GridShape) -> Self {
        Self::boxes(shape, false)
    }

    pub fn all_discrete_periodic(shape: GridShape) -> Self {
        Self::boxes(shape, true)
    }

    /// All cubes when `d·L ≤ 12`, the grid's dyadic lattice otherwise.
    pub fn default_for(grid: &DyadicGrid) -> Self {
        if grid.d() * grid.depth() as usize <= 12 {
            Self::all_discrete(grid.shape)
        } else {
            Self::dyadic(grid)
        }
    }

    pub fn with_mode(mode: FamilyMode, grid: &DyadicGrid) -> Self {
        match mode {
            FamilyMode::Dyadic => Self::dyadic(grid),
            FamilyMode::AllDiscrete => Self::all_discrete(grid.shape),
            FamilyMode::AllDiscretePeriodic => Self::all_discrete_periodic(grid.shape),
        }
    }

    fn boxes(shape: GridShape, periodic: bool) -> Self {
        let n = shape.n();
        let mut cubes = Vec::new();
        let mut origin_index = Vec::new();
        let mut by_side = vec![Vec::new(); n + 1];
        for s in 1..=n {
            for o in 0..shape.cells() {
                let origin = shape.coords(o);
                let fits = origin.iter().all(|&x| x + s <= n);
                let keep = if s == n { o == 0 } else { periodic || fits };
                if keep {
                    by_side[s].push(cubes.len());
                    origin_index.push(o);
                    cubes.push(DiscreteCube { origin, side: s });
                }
            }
        }
        let mode = if periodic { FamilyMode::AllDiscretePeriodic } else { FamilyMode::AllDiscrete };
        Self { mode, shape, cubes, layout: Layout::Boxes { origin_index, by_side } }
    }

    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn cubes(&self) -> &[DiscreteCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// `Σ_{x∈Q} v(x)` for every cube.
    pub fn sums(&self, v: &[f64]) -> Vec<f64> {
        match &self.layout {
            Layout::Dyadic { labels, starts, .. } => {
                let mut out = vec![0.0; self.cubes.len()];
                for (lab, &start) in labels.iter().zip(starts) {
                    for (c, &l) in lab.iter().enumerate() {
                        out[start + l] += v[c];
                    }
                }
                out
            }
            Layout::Boxes { .. } => {
                let table = PeriodicSums::new(self.shape, v);
                self.cubes.iter().map(|q| table.box_sum(&q.origin, q.side)).collect()
            }
        }
    }

    fn extremes(&self, v: &[f64], better: fn(f64, f64) -> f64, init: f64) -> Vec<f64> {
        match &self.layout {
            Layout::Dyadic { labels, starts, .. } => {
                let mut out = vec![init; self.cubes.len()];
                for (lab, &start) in labels.iter().zip(starts) {
                    for (c, &l) in lab.iter().enumerate() {
                        out[start + l] = better(out[start + l], v[c]);
                    }
                }
                out
            }
            Layout::Boxes { origin_index, by_side } => {
                let shape = self.shape;
                let n = shape.n();
                let d = shape.d;
                let mut out = vec![init; self.cubes.len()];
                let mut table = v.to_vec();
                let coords: Vec<Vec<usize>> = (0..shape.cells()).map(|o| shape.coords(o)).collect();
                for s in 1..=n {
                    if s > 1 {
                        let prev = table.clone();
                        for (o, oc) in coords.iter().enumerate() {
                            let mut best = init;
                            for bits in 0..1usize << d {
                                let idx = (0..d).fold(0, |acc, k| acc * n + (oc[k] + ((bits >> k) & 1)) % n);
                                best = better(best, prev[idx]);
                            }
                            table[o] = best;
                        }
                    }
                    for &q in &by_side[s] {
                        out[q] = table[origin_index[q]];
                    }
                }
                out
            }
        }
    }

    pub fn maxes(&self, v: &[f64]) -> Vec<f64> {
        self.extremes(v, f64::max, f64::NEG_INFINITY)
    }

    pub fn mins(&self, v: &[f64]) -> Vec<f64> {
        self.extremes(v, f64::min, f64::INFINITY)
    }

    /// `x ↦ max_{Q ∋ x} a_Q` for per-cube values `a`.
    pub fn spread_max(&self, per_cube: &[f64]) -> Vec<f64> {
        let cells = self.shape.cells();
        match &self.layout {
            Layout::Dyadic { labels, starts, .. } => {
                let mut out = vec![f64::NEG_INFINITY; cells];
                for (lab, &start) in labels.iter().zip(starts) {
                    for (c, &l) in lab.iter().enumerate() {
                        out[c] = out[c].max(per_cube[start + l]);
                    }
                }
                out
            }
            Layout::Boxes { origin_index, by_side } => {
                let shape = self.shape;
                let n = shape.n();
                let d = shape.d;
                let coords: Vec<Vec<usize>> = (0..cells).map(|o| shape.coords(o)).collect();
                // the side-n box is one set; seed every origin with it
                let mut down = vec![f64::NEG_INFINITY; cells];
                for &q in &by_side[n] {
                    down.iter_mut().for_each(|x| *x = x.max(per_cube[q]));
                }
                for s in (1..n).rev() {
                    let mut own = vec![f64::NEG_INFINITY; cells];
                    for &q in &by_side[s] {
                        own[origin_index[q]] = per_cube[q];
                    }
                    let above = down;
                    down = vec![f64::NEG_INFINITY; cells];
                    for (o, oc) in coords.iter().enumerate() {
                        let mut best = own[o];
                        for bits in 0..1usize << d {
                            let idx = (0..d).fold(0, |acc, k| acc * n + (oc[k] + n - ((bits >> k) & 1)) % n);
                            best = best.max(above[idx]);
                        }
                        down[o] = best;
                    }
                }
                down
            }
        }
    }

    /// The dyadic lattice behind a dyadic family.
    pub fn dyadic_grid(&self) -> Option<&DyadicGrid> {
        match &self.layout {
            Layout::Dyadic { grid, .. } => Some(grid),
            Layout::Boxes { .. } => None,
        }
    }
}
