use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OperatorError;
use crate::dyadic::{haar_support, Cube, DyadicGrid, GridFunction, ProductFunction};

/// A test or output function of a rank-one term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Atom {
    /// `h_I^η`; `η = 0` is `h_I^0 = |I|^{−1/2} 1_I`.
    Haar { cube: Cube, eta: Vec<u8> },
    /// `1_Q / |Q|`, so that pairing with it is `⟨f⟩_Q`.
    Average { cube: Cube },
}

impl Atom {
    fn support(&self, grid: &DyadicGrid) -> Result<Vec<(usize, f64)>, OperatorError> {
        match self {
            Atom::Haar { cube, eta } => Ok(haar_support(grid, cube, eta)?),
            Atom::Average { cube } => {
                grid.check_cube(cube)?;
                let v = 1.0 / cube.volume();
                Ok(grid.cube_cells(cube).into_iter().map(|c| (c, v)).collect())
            }
        }
    }
}

/// `coeff · ⟨f₁, first⟩ ⟨f₂, second⟩ · output`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub first: Atom,
    pub second: Atom,
    pub output: Atom,
}

#[derive(Clone, Debug, PartialEq)]
struct Realized {
    cells: Vec<usize>,
    vals: Vec<f64>,
}

impl Realized {
    fn new(support: Vec<(usize, f64)>) -> Self {
        let (cells, vals) = support.into_iter().unzip();
        Self { cells, vals }
    }

    fn pair(&self, f: &[f64], vol: f64) -> f64 {
        self.cells.iter().zip(&self.vals).map(|(&c, v)| f[c] * v).sum::<f64>() * vol
    }
}

/// A bilinear operator given as a finite sum of rank-one terms on one lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelOperator {
    grid: DyadicGrid,
    terms: Vec<Term>,
    realized: Vec<[Realized; 3]>,
}

impl ModelOperator {
    pub fn new(grid: DyadicGrid, terms: Vec<Term>) -> Result<Self, OperatorError> {
        let realized = terms
            .iter()
            .map(|t| {
                Ok([
                    Realized::new(t.first.support(&grid)?),
                    Realized::new(t.second.support(&grid)?),
                    Realized::new(t.output.support(&grid)?),
                ])
            })
            .collect::<Result<Vec<_>, OperatorError>>()?;
        Ok(Self { grid, terms, realized })
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// The per-term scalars `coeff · ⟨f₁, first⟩ ⟨f₂, second⟩`.
    fn scalars<'a>(&'a self, f1: &'a [f64], f2: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let vol = self.grid.shape.cell_volume();
        self.terms
            .iter()
            .zip(&self.realized)
            .map(move |(t, r)| t.coeff * r[0].pair(f1, vol) * r[1].pair(f2, vol))
    }

    pub fn apply(&self, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
        let shape = self.grid.shape;
        assert!(f1.shape() == shape && f2.shape() == shape, "grid shapes differ");
        let mut out = vec![0.0; shape.cells()];
        for (c, r) in self.scalars(f1.values(), f2.values()).zip(&self.realized) {
            if c != 0.0 {
                for (&cell, v) in r[2].cells.iter().zip(&r[2].vals) {
                    out[cell] += c * v;
                }
            }
        }
        GridFunction::new(shape, out).expect("shape checked")
    }

    /// `⟨U(f₁, f₂), f₃⟩`.
    pub fn trilinear(&self, f1: &GridFunction, f2: &GridFunction, f3: &GridFunction) -> f64 {
        let vol = self.grid.shape.cell_volume();
        self.scalars(f1.values(), f2.values())
            .zip(&self.realized)
            .map(|(c, r)| c * r[2].pair(f3.values(), vol))
            .sum()
    }
}

/// Which slot carries the non-cancellative `h⁰`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftForm {
    NoncancelSlot1,
    NoncancelSlot2,
    NoncancelSlot3,
}

impl ShiftForm {
    pub const ALL: [ShiftForm; 3] = [ShiftForm::NoncancelSlot1, ShiftForm::NoncancelSlot2, ShiftForm::NoncancelSlot3];

    pub fn slot(self) -> usize {
        match self {
            ShiftForm::NoncancelSlot1 => 0,
            ShiftForm::NoncancelSlot2 => 1,
            ShiftForm::NoncancelSlot3 => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftCoeff {
    #[serde(rename = "K")]
    pub k: Cube,
    pub cubes: [Cube; 3],
    pub etas: [Vec<u8>; 3],
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ShiftSpecData {
    grid: DyadicGrid,
    complexity: [u32; 3],
    form: ShiftForm,
    coeffs: Vec<ShiftCoeff>,
}

/// A bilinear dyadic shift with a size-normalized coefficient table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShiftSpecData")]
pub struct ShiftSpec {
    grid: DyadicGrid,
    complexity: [u32; 3],
    form: ShiftForm,
    coeffs: Vec<ShiftCoeff>,
}

impl TryFrom<ShiftSpecData> for ShiftSpec {
    type Error = OperatorError;

    fn try_from(d: ShiftSpecData) -> Result<Self, OperatorError> {
        ShiftSpec::new(d.grid, d.complexity, d.form, d.coeffs)
    }
}

/// Relative slack allowed in the normalization checks.
const NORM_TOL: f64 = 1e-12;

/// `|I₁|^{1/2} |I₂|^{1/2} |I₃|^{1/2} / |K|²`.
pub fn shift_coeff_bound(k: &Cube, cubes: &[Cube; 3]) -> f64 {
    cubes.iter().map(|c| c.volume().sqrt()).product::<f64>() / k.volume().powi(2)
}

impl ShiftSpec {
    pub fn new(
        grid: DyadicGrid,
        complexity: [u32; 3],
        form: ShiftForm,
        coeffs: Vec<ShiftCoeff>,
    ) -> Result<Self, OperatorError> {
        let depth = grid.depth();
        for (index, c) in coeffs.iter().enumerate() {
            grid.check_cube(&c.k)?;
            for slot in 0..3 {
                let cube = &c.cubes[slot];
                grid.check_cube(cube)?;
                if cube.level != c.k.level + complexity[slot] || !grid.contains(&c.k, cube) {
                    return Err(OperatorError::NotNested { index, slot: slot + 1 });
                }
                let eta = &c.etas[slot];
                let cancellative = eta.contains(&1);
                let ok = eta.len() == grid.d() && eta.iter().all(|&e| e <= 1) && cancellative != (slot == form.slot());
                if !ok {
                    return Err(OperatorError::Eta { index, slot: slot + 1, eta: eta.clone() });
                }
                if cancellative && cube.level >= depth {
                    return Err(OperatorError::Depth { index, slot: slot + 1, level: cube.level });
                }
            }
            let bound = shift_coeff_bound(&c.k, &c.cubes);
            if !(c.a.abs() <= bound * (1.0 + NORM_TOL)) {
                return Err(OperatorError::Normalization { index, cube: c.k.clone(), value: c.a, bound });
            }
        }
        Ok(Self { grid, complexity, form, coeffs })
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn complexity(&self) -> [u32; 3] {
        self.complexity
    }

    pub fn max_complexity(&self) -> u32 {
        self.complexity.iter().copied().max().unwrap_or(0)
    }

    pub fn form(&self) -> ShiftForm {
        self.form
    }

    pub fn coeffs(&self) -> &[ShiftCoeff] {
        &self.coeffs
    }

    pub fn operator(&self) -> ModelOperator {
        let atom = |c: &ShiftCoeff, s: usize| Atom::Haar { cube: c.cubes[s].clone(), eta: c.etas[s].clone() };
        let terms = self
            .coeffs
            .iter()
            .map(|c| Term { coeff: c.a, first: atom(c, 0), second: atom(c, 1), output: atom(c, 2) })
            .collect();
        ModelOperator::new(self.grid.clone(), terms).expect("validated at construction")
    }

    /// `Σ_K Σ_{Iᵢ^{(kᵢ)}=K} a ⟨f₁, h_{I₁}⟩ ⟨f₂, h_{I₂}⟩ h_{I₃}` with `h⁰` in the form's slot.
    pub fn apply(&self, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
        self.operator().apply(f1, f2)
    }
}

pub fn shift_apply(spec: &ShiftSpec, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
    spec.apply(f1, f2)
}

/// The three paraproduct forms, named by where the Haar function sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaForm {
    /// `a_K ⟨f₁⟩_K ⟨f₂⟩_K h_K`
    Output,
    /// `a_K ⟨f₁, h_K⟩ ⟨f₂⟩_K 1_K/|K|`
    First,
    /// `a_K ⟨f₁⟩_K ⟨f₂, h_K⟩ 1_K/|K|`
    Second,
}

impl ParaForm {
    pub const ALL: [ParaForm; 3] = [ParaForm::Output, ParaForm::First, ParaForm::Second];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParaCoeff {
    #[serde(rename = "K")]
    pub k: Cube,
    pub eta: Vec<u8>,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ParaproductSpecData {
    grid: DyadicGrid,
    form: ParaForm,
    coeffs: Vec<ParaCoeff>,
}

/// A bilinear dyadic paraproduct with a Carleson-normalized coefficient table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParaproductSpecData")]
pub struct ParaproductSpec {
    grid: DyadicGrid,
    form: ParaForm,
    coeffs: Vec<ParaCoeff>,
}

impl TryFrom<ParaproductSpecData> for ParaproductSpec {
    type Error = OperatorError;

    fn try_from(d: ParaproductSpecData) -> Result<Self, OperatorError> {
        ParaproductSpec::new(d.grid, d.form, d.coeffs)
    }
}

/// `max_{K₀} (|K₀|^{−1} Σ_{K⊆K₀} |a_K|²)^{1/2}` and the cube attaining it.
pub fn carleson_norm(grid: &DyadicGrid, coeffs: &[ParaCoeff]) -> (f64, Cube) {
    let mut mass: HashMap<Cube, f64> = HashMap::new();
    for c in coeffs {
        for up in 0..=c.k.level {
            *mass.entry(grid.ancestor(&c.k, up).expect("up ≤ level")).or_default() += c.a * c.a;
        }
    }
    let mut entries: Vec<(Cube, f64)> = mass.into_iter().map(|(q, s)| (q.clone(), (s / q.volume()).sqrt())).collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
        .into_iter()
        .fold((0.0, Cube::top(grid.d())), |best, (q, v)| if v > best.0 { (v, q) } else { best })
}

impl ParaproductSpec {
    pub fn new(grid: DyadicGrid, form: ParaForm, coeffs: Vec<ParaCoeff>) -> Result<Self, OperatorError> {
        for (index, c) in coeffs.iter().enumerate() {
            grid.check_cube(&c.k)?;
            let ok = c.eta.len() == grid.d() && c.eta.iter().all(|&e| e <= 1) && c.eta.contains(&1);
            if !ok {
                return Err(OperatorError::Eta { index, slot: 0, eta: c.eta.clone() });
            }
            if c.k.level >= grid.depth() {
                return Err(OperatorError::Depth { index, slot: 0, level: c.k.level });
            }
            if !c.a.is_finite() {
                return Err(OperatorError::Normalization { index, cube: c.k.clone(), value: c.a, bound: f64::INFINITY });
            }
        }
        let (norm, cube) = carleson_norm(&grid, &coeffs);
        if norm > 1.0 + NORM_TOL {
            return Err(OperatorError::Carleson { cube, value: norm });
        }
        Ok(Self { grid, form, coeffs })
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn form(&self) -> ParaForm {
        self.form
    }

    pub fn coeffs(&self) -> &[ParaCoeff] {
        &self.coeffs
    }

    pub fn operator(&self) -> ModelOperator {
        let terms = self
            .coeffs
            .iter()
            .map(|c| {
                let h = Atom::Haar { cube: c.k.clone(), eta: c.eta.clone() };
                let avg = Atom::Average { cube: c.k.clone() };
                let (first, second, output) = match self.form {
                    ParaForm::Output => (avg.clone(), avg, h),
                    ParaForm::First => (h, avg.clone(), avg),
                    ParaForm::Second => (avg.clone(), h, avg),
                };
                Term { coeff: c.a, first, second, output }
            })
            .collect();
        ModelOperator::new(self.grid.clone(), terms).expect("validated at construction")
    }

    pub fn apply(&self, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
        self.operator().apply(f1, f2)
    }
}

pub fn paraproduct_apply(spec: &ParaproductSpec, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
    spec.apply(f1, f2)
}

/// Either kind of bilinear model operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Shift(ShiftSpec),
    Paraproduct(ParaproductSpec),
}

impl ModelSpec {
    pub fn grid(&self) -> &DyadicGrid {
        match self {
            ModelSpec::Shift(s) => s.grid(),
            ModelSpec::Paraproduct(p) => p.grid(),
        }
    }

    pub fn operator(&self) -> ModelOperator {
        match self {
            ModelSpec::Shift(s) => s.operator(),
            ModelSpec::Paraproduct(p) => p.operator(),
        }
    }

    pub fn max_complexity(&self) -> u32 {
        match self {
            ModelSpec::Shift(s) => s.max_complexity(),
            ModelSpec::Paraproduct(_) => 0,
        }
    }
}

fn random_eta<R: Rng + ?Sized>(d: usize, cancellative: bool, rng: &mut R) -> Vec<u8> {
    if !cancellative {
        return vec![0; d];
    }
    let b = rng.gen_range(1..1usize << d);
    (0..d).map(|k| ((b >> k) & 1) as u8).collect()
}

/// A random shift whose coefficients sit at `fill` times the size bound, with random signs.
///
/// Each admissible `K` is kept with probability `density`.
pub fn random_shift<R: Rng + ?Sized>(
    grid: &DyadicGrid,
    complexity: [u32; 3],
    form: ShiftForm,
    fill: f64,
    density: f64,
    rng: &mut R,
) -> Result<ShiftSpec, OperatorError> {
    let depth = grid.depth();
    let d = grid.d();
    let mut coeffs = Vec::new();
    for k in grid.all_cubes() {
        let fits = (0..3).all(|s| {
            let level = k.level + complexity[s];
            if s == form.slot() {
                level <= depth
            } else {
                level < depth
            }
        });
        if !fits || !rng.gen_bool(density.clamp(0.0, 1.0)) {
            continue;
        }
        let d1 = grid.descendants(&k, complexity[0]);
        let d2 = grid.descendants(&k, complexity[1]);
        let d3 = grid.descendants(&k, complexity[2]);
        for i1 in &d1 {
            for i2 in &d2 {
                for i3 in &d3 {
                    let cubes = [i1.clone(), i2.clone(), i3.clone()];
                    let bound = shift_coeff_bound(&k, &cubes);
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let etas = [0, 1, 2].map(|s| random_eta(d, s != form.slot(), rng));
                    coeffs.push(ShiftCoeff { k: k.clone(), cubes, etas, a: sign * fill * bound });
                }
            }
        }
    }
    ShiftSpec::new(grid.clone(), complexity, form, coeffs)
}

/// A random paraproduct with `|a_K| = fill·(|K|/L)^{1/2}`, so its Carleson norm is at most `fill`.
pub fn random_paraproduct<R: Rng + ?Sized>(
    grid: &DyadicGrid,
    form: ParaForm,
    fill: f64,
    rng: &mut R,
) -> Result<ParaproductSpec, OperatorError> {
    let depth = grid.depth();
    let coeffs = (0..depth)
        .flat_map(|l| grid.cubes_at(l).collect::<Vec<_>>())
        .map(|k| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let a = sign * fill * (k.volume() / depth as f64).sqrt();
            ParaCoeff { eta: random_eta(grid.d(), true, rng), k, a }
        })
        .collect();
    ParaproductSpec::new(grid.clone(), form, coeffs)
}

fn check_product(a: &ModelOperator, b: &ModelOperator, f: &ProductFunction) -> Result<(), OperatorError> {
    let s = f.shape();
    if s.first != a.grid.shape || s.second != b.grid.shape {
        return Err(OperatorError::Shape(format!(
            "operators live on {:?} × {:?}, function on {:?} × {:?}",
            a.grid.shape, b.grid.shape, s.first, s.second
        )));
    }
    Ok(())
}

/// `⟨f, b⟩₂` as a function of `x₁`.
fn pair_second(f: &ProductFunction, b: &Realized) -> GridFunction {
    let s = f.shape();
    let vol = s.second.cell_volume();
    GridFunction::from_fn(s.first, |i| b.pair(f.slice(i).values(), vol))
}

/// `(A ⊗ B)(f₁, f₂)`, expanding `B` in `x₂` and applying `A` to the coefficient slices.
pub fn tensor_apply(
    a: &ModelOperator,
    b: &ModelOperator,
    f1: &ProductFunction,
    f2: &ProductFunction,
) -> Result<ProductFunction, OperatorError> {
    check_product(a, b, f1)?;
    check_product(a, b, f2)?;
    let shape = f1.shape();
    let n2 = shape.second.cells();
    let mut out = vec![0.0; shape.cells()];
    for (t, r) in b.terms.iter().zip(&b.realized) {
        let u = a.apply(&pair_second(f1, &r[0]), &pair_second(f2, &r[1]));
        for (i, &ui) in u.values().iter().enumerate() {
            if ui != 0.0 {
                for (&j, v) in r[2].cells.iter().zip(&r[2].vals) {
                    out[i * n2 + j] += t.coeff * ui * v;
                }
            }
        }
    }
    Ok(ProductFunction::new(shape, out)?)
}

/// The same operator as a double sum over pairs of terms; quadratic cost, for small grids.
pub fn tensor_apply_direct(
    a: &ModelOperator,
    b: &ModelOperator,
    f1: &ProductFunction,
    f2: &ProductFunction,
) -> Result<ProductFunction, OperatorError> {
    check_product(a, b, f1)?;
    check_product(a, b, f2)?;
    let shape = f1.shape();
    let n2 = shape.second.cells();
    let vol = shape.cell_volume();
    let pair = |f: &ProductFunction, x: &Realized, y: &Realized| {
        let mut s = 0.0;
        for (&i, vi) in x.cells.iter().zip(&x.vals) {
            for (&j, vj) in y.cells.iter().zip(&y.vals) {
                s += f.get(i, j) * vi * vj;
            }
        }
        s * vol
    };
    let mut out = vec![0.0; shape.cells()];
    for (ta, ra) in a.terms.iter().zip(&a.realized) {
        for (tb, rb) in b.terms.iter().zip(&b.realized) {
            let c = ta.coeff * tb.coeff * pair(f1, &ra[0], &rb[0]) * pair(f2, &ra[1], &rb[1]);
            for (&i, vi) in ra[2].cells.iter().zip(&ra[2].vals) {
                for (&j, vj) in rb[2].cells.iter().zip(&rb[2].vals) {
                    out[i * n2 + j] += c * vi * vj;
                }
            }
        }
    }
    Ok(ProductFunction::new(shape, out)?)
}
