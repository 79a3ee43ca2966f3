use crate::dyadic::{DyadicGrid, GridFunction};
use crate::weights::{BaseMeasure, CubeFamily, Weight};

/// `M_μ` over a fixed cube family, with the cube masses precomputed.
#[derive(Clone, Debug)]
pub struct Maximal {
    fam: CubeFamily,
    masses: Option<Vec<f64>>,
    cube_mass: Vec<f64>,
}

impl Maximal {
    /// `mu = None` is Lebesgue measure.
    pub fn new(fam: CubeFamily, mu: Option<&BaseMeasure>) -> Self {
        let d = fam.shape().d as u32;
        let cube_mass = match mu {
            Some(m) => fam.sums(m.masses()),
            None => fam.cubes().iter().map(|q| q.side.pow(d) as f64).collect(),
        };
        Self { masses: mu.map(|m| m.masses().to_vec()), fam, cube_mass }
    }

    pub fn family(&self) -> &CubeFamily {
        &self.fam
    }

    /// `⨍_Q |f| dμ` for every cube of the family.
    pub fn averages(&self, f: &[f64]) -> Vec<f64> {
        let integrand: Vec<f64> = match &self.masses {
            Some(m) => f.iter().zip(m).map(|(x, w)| x.abs() * w).collect(),
            None => f.iter().map(|x| x.abs()).collect(),
        };
        self.fam.sums(&integrand).iter().zip(&self.cube_mass).map(|(s, m)| s / m).collect()
    }

    pub fn apply_values(&self, f: &[f64]) -> Vec<f64> {
        self.fam.spread_max(&self.averages(f))
    }

    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        GridFunction::new(f.shape(), self.apply_values(f.values())).expect("same shape")
    }

    /// `M(f₁, f₂)(x) = max_{Q∋x} ⨍_Q|f₁| ⨍_Q|f₂|`.
    pub fn apply_bilinear(&self, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
        let a: Vec<f64> = self
            .averages(f1.values())
            .iter()
            .zip(self.averages(f2.values()))
            .map(|(x, y)| x * y)
            .collect();
        GridFunction::new(f1.shape(), self.fam.spread_max(&a)).expect("same shape")
    }
}

/// `Mf(x) = max_{Q ∋ x} ⨍_Q |f| dμ`.
pub fn hl_maximal(f: &GridFunction, mu: &BaseMeasure, fam: &CubeFamily) -> GridFunction {
    Maximal::new(fam.clone(), Some(mu)).apply(f)
}

/// `M^𝒟_w f`: the dyadic maximal function with respect to `w dx`.
pub fn weighted_dyadic_maximal(f: &GridFunction, w: &Weight, grid: &DyadicGrid) -> GridFunction {
    Maximal::new(CubeFamily::dyadic(grid), Some(&BaseMeasure::from_weight(w))).apply(f)
}

pub fn bilinear_maximal(f1: &GridFunction, f2: &GridFunction, fam: &CubeFamily) -> GridFunction {
    Maximal::new(fam.clone(), None).apply_bilinear(f1, f2)
}
