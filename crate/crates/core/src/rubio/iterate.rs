use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RubioError;
use crate::dyadic::{GridFunction, GridShape};
use crate::exponents::{Exponent, Rational};
use crate::norms::lp_measure;
use crate::operators::Maximal;
use crate::weights::{ap_constant, BaseMeasure, CubeFamily, FamilyMode, Weight};
use num_traits::{One, ToPrimitive};

/// Default truncation depth.
pub const DEFAULT_K: usize = 16;
/// Default multiplier on the largest observed ratio in empirical mode.
pub const DEFAULT_SAFETY: f64 = 2.0;

/// `t^{1/(t−1)}·t′`, so that `‖M^D‖_{L^t(v)} ≤ c(t)·[v]_{A_t}^{1/(t−1)}` on one dyadic lattice.
///
/// Comes from Lerner's pointwise bound plus Doob's inequality for `M_v` and `M_{v^{1−t′}}`.
/// Dimension free; `c(2) = 4`.
pub fn buckley_constant(t: f64) -> f64 {
    t.powf(1.0 / (t - 1.0)) * t / (t - 1.0)
}

/// Which maximal operator the iteration runs.
#[derive(Clone, Debug, PartialEq)]
pub enum MaximalVariant {
    /// `M` itself.
    Plain,
    /// `M′h = M(h u)/u`.
    Conjugated(Weight),
}

/// A maximal operator together with the space `L^t(σ)` it is measured on.
#[derive(Clone, Debug)]
pub struct RdfOperator {
    maximal: Maximal,
    variant: MaximalVariant,
    t: Exponent,
    sigma: Weight,
}

impl RdfOperator {
    pub fn new(fam: CubeFamily, variant: MaximalVariant, t: Exponent, sigma: Weight) -> Result<Self, RubioError> {
        if t.is_infinite() || *t.inv() >= Rational::one() {
            return Err(RubioError::Range(format!(
                "maximal bounds need 1 < t < ∞ (p′γ = 1 + p′/r > 1), got t = {t}"
            )));
        }
        if sigma.shape() != fam.shape() {
            return Err(RubioError::Shape("weight and cube family live on different grids".into()));
        }
        if let MaximalVariant::Conjugated(u) = &variant {
            if u.shape() != fam.shape() {
                return Err(RubioError::Shape("conjugating weight and family differ".into()));
            }
        }
        Ok(Self { maximal: Maximal::new(fam, None), variant, t, sigma })
    }

    /// `M` on `L^t(σ)`.
    pub fn plain(fam: CubeFamily, t: Exponent, sigma: Weight) -> Result<Self, RubioError> {
        Self::new(fam, MaximalVariant::Plain, t, sigma)
    }

    /// `M′h = M(hu)/u` on `L^t(u)`.
    pub fn conjugated(fam: CubeFamily, t: Exponent, u: Weight) -> Result<Self, RubioError> {
        Self::new(fam, MaximalVariant::Conjugated(u.clone()), t, u)
    }

    pub fn family(&self) -> &CubeFamily {
        self.maximal.family()
    }

    pub fn variant(&self) -> &MaximalVariant {
        &self.variant
    }

    pub fn exponent(&self) -> &Exponent {
        &self.t
    }

    pub fn space_weight(&self) -> &Weight {
        &self.sigma
    }

    pub fn shape(&self) -> GridShape {
        self.sigma.shape()
    }

    pub fn apply_values(&self, h: &[f64]) -> Vec<f64> {
        match &self.variant {
            MaximalVariant::Plain => self.maximal.apply_values(h),
            MaximalVariant::Conjugated(u) => {
                let hu: Vec<f64> = h.iter().zip(u.values()).map(|(a, b)| a * b).collect();
                self.maximal.apply_values(&hu).iter().zip(u.values()).map(|(m, b)| m / b).collect()
            }
        }
    }

    pub fn apply(&self, h: &GridFunction) -> GridFunction {
        GridFunction::new(h.shape(), self.apply_values(h.values())).expect("same shape")
    }

    /// `‖h‖_{L^t(σ)}`.
    pub fn norm(&self, h: &GridFunction) -> f64 {
        lp_measure(h, self.t.to_f64(), self.sigma.as_function())
    }

    /// A pointwise bound on every iterate `M^{(k)}h`.
    pub fn iterate_ceiling(&self, h: &GridFunction) -> f64 {
        match &self.variant {
            MaximalVariant::Plain => h.max(),
            MaximalVariant::Conjugated(u) => h.mul(u).max() * u.recip().max(),
        }
    }

    /// The weight `v` with `‖op‖_{L^t(σ)} = ‖M‖_{L^t(v)}`: `σ` or `σ u^{−t}`.
    pub fn effective_weight(&self) -> Weight {
        match &self.variant {
            MaximalVariant::Plain => self.sigma.clone(),
            MaximalVariant::Conjugated(u) => self.sigma.mul_w(&u.pow(-self.t.to_f64())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BoundMode {
    /// `c(t)·[v]_{A_t}^{1/(t−1)}`; dyadic families only.
    Buckley,
    /// Largest observed `‖op h‖/‖h‖` over seeded inputs, times `safety`.
    Empirical { trials: usize, safety: f64, seed: u64 },
}

impl BoundMode {
    pub fn empirical(seed: u64) -> Self {
        BoundMode::Empirical { trials: 64, safety: DEFAULT_SAFETY, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    #[serde(rename = "B")]
    pub b: f64,
    pub mode: BoundMode,
    /// Buckley bounds are proved; empirical ones are not.
    pub certified: bool,
    pub a_t: Option<f64>,
    pub max_observed: Option<f64>,
}

fn probe_inputs(shape: GridShape, fam: &CubeFamily, trials: usize, rng: &mut ChaCha8Rng) -> Vec<GridFunction> {
    let cells = shape.cells();
    let mut out = vec![GridFunction::constant(shape, 1.0)];
    for i in 0..trials {
        let f = match i % 3 {
            0 => {
                let spread = rng.gen_range(0.5..6.0);
                GridFunction::from_fn(shape, |_| (spread * rng.gen_range(-1.0..1.0f64)).exp())
            }
            1 => {
                let q = &fam.cubes()[rng.gen_range(0..fam.len())];
                GridFunction::indicator(shape, q)
            }
            _ => {
                let c = rng.gen_range(0..cells);
                GridFunction::from_fn(shape, |x| if x == c { 1.0 } else { 0.0 })
            }
        };
        out.push(f);
    }
    out
}

/// An upper estimate `B` for the norm of `op` on its space.
pub fn maximal_norm_bound(op: &RdfOperator, mode: BoundMode) -> Result<NormBound, RubioError> {
    match mode {
        BoundMode::Buckley => {
            if op.family().mode() != FamilyMode::Dyadic {
                return Err(RubioError::Range("Buckley bounds are only available for the dyadic family".into()));
            }
            let t = op.t.to_f64();
            let v = op.effective_weight();
            let leb = BaseMeasure::lebesgue(op.shape());
            let a_t = ap_constant(&v, &op.t, &leb, op.family())?.constant;
            let b = buckley_constant(t) * a_t.powf(1.0 / (t - 1.0));
            Ok(NormBound { b, mode, certified: true, a_t: Some(a_t), max_observed: None })
        }
        BoundMode::Empirical { trials, safety, seed } => {
            if !(safety >= 1.0) {
                return Err(RubioError::Range(format!("safety factor must be ≥ 1, got {safety}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut observed = 0.0f64;
            let mut inputs = probe_inputs(op.shape(), op.family(), trials, &mut rng);
            if let MaximalVariant::Conjugated(u) = &op.variant {
                // M′(1/u) = 1/u
                inputs.push(u.recip().into_function());
            }
            for h in &inputs {
                let n = op.norm(h);
                if n > 0.0 {
                    observed = observed.max(op.norm(&op.apply(h)) / n);
                }
            }
            Ok(NormBound { b: observed * safety, mode, certified: false, a_t: None, max_observed: Some(observed) })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdfCerts {
    /// `𝓡_K h ≥ h` everywhere.
    pub domination: bool,
    /// `‖𝓡_K h‖ / ‖h‖` in the operator's space.
    pub norm_ratio: f64,
    /// `max op(𝓡_K h) / (2B·𝓡_{K+1} h)`; at most 1.
    pub a1_pointwise_ratio: f64,
    /// `max 𝓡_{K+1}h / 𝓡_K h`, the truncation correction in `[·]_{A₁} ≤ 2B·(this)`.
    pub step_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RdfResult {
    pub majorant: GridFunction,
    /// `𝓡_{K+1} h`.
    pub next: GridFunction,
    pub b: f64,
    pub k: usize,
    pub tail_bound: f64,
    pub certs: RdfCerts,
}

impl RdfResult {
    /// `‖𝓡_K h‖ ≤ 2‖h‖ + tail` within `tol`.
    pub fn norm_within(&self, tol: f64) -> bool {
        self.certs.norm_ratio <= 2.0 + tol
    }
}

/// `(2B/(2B−1))·S·(2B)^{−K}` with `S` a ceiling for every iterate.
pub fn tail_bound(b: f64, ceiling: f64, k: usize) -> f64 {
    let two_b = 2.0 * b;
    if two_b <= 1.0 {
        return f64::INFINITY;
    }
    two_b / (two_b - 1.0) * ceiling * two_b.powi(-(k as i32))
}

fn max_ratio(num: &[f64], den: &[f64]) -> f64 {
    num.iter()
        .zip(den)
        .map(|(&a, &b)| match (a > 0.0, b > 0.0) {
            (_, true) => a / b,
            (true, false) => f64::INFINITY,
            (false, false) => 0.0,
        })
        .fold(0.0, f64::max)
}

/// `𝓡_K h = Σ_{k≤K} op^{(k)} h / (2B)^k` and its certificates.
pub fn rdf_iterate(h: &GridFunction, op: &RdfOperator, b: f64, k: usize) -> Result<RdfResult, RubioError> {
    if let Some((cell, &v)) = h.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(RubioError::Negative { cell, value: v });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(RubioError::Range(format!("B must be positive and finite, got {b}")));
    }
    if h.shape() != op.shape() {
        return Err(RubioError::Shape("h and operator live on different grids".into()));
    }
    let two_b = 2.0 * b;
    let mut term = h.values().to_vec();
    let mut sum = term.clone();
    let mut scale = 1.0;
    for _ in 0..k {
        term = op.apply_values(&term);
        scale /= two_b;
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += scale * t);
    }
    term = op.apply_values(&term);
    scale /= two_b;
    let next: Vec<f64> = sum.iter().zip(&term).map(|(s, t)| s + scale * t).collect();

    let domination = sum.iter().zip(h.values()).all(|(r, x)| r >= x);
    let lhs = op.apply_values(&sum);
    let rhs: Vec<f64> = next.iter().map(|x| two_b * x).collect();
    let a1_pointwise_ratio = max_ratio(&lhs, &rhs);
    let step_ratio = max_ratio(&next, &sum).max(1.0);

    let majorant = GridFunction::new(h.shape(), sum)?;
    let next = GridFunction::new(h.shape(), next)?;
    let nh = op.norm(h);
    let norm_ratio = if nh > 0.0 { op.norm(&majorant) / nh } else { 0.0 };
    let tail = tail_bound(b, op.iterate_ceiling(h), k);
    Ok(RdfResult {
        majorant,
        next,
        b,
        k,
        tail_bound: tail,
        certs: RdfCerts { domination, norm_ratio, a1_pointwise_ratio, step_ratio },
    })
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
