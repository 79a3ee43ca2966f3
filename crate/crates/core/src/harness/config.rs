use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::dyadic::{GridShape, ShiftMode};
use crate::exponents::{Exponent, ExponentVector, VectorKind};
use crate::weights::{FamilyMode, WeightGen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OffdiagRatio,
    MultilinearExtrapolate,
    SparseDomination,
    LemmaRatio,
    TensorMixedNorm,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::OffdiagRatio,
        ExperimentKind::MultilinearExtrapolate,
        ExperimentKind::SparseDomination,
        ExperimentKind::LemmaRatio,
        ExperimentKind::TensorMixedNorm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::OffdiagRatio => "offdiag-ratio",
            ExperimentKind::MultilinearExtrapolate => "multilinear-extrapolate",
            ExperimentKind::SparseDomination => "sparse-domination",
            ExperimentKind::LemmaRatio => "lemma-ratio",
            ExperimentKind::TensorMixedNorm => "tensor-mixed-norm",
        }
    }
}

/// `d` and depth `L`; `n`, `m` are the factor dimensions of product experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl GridConfig {
    pub fn shape(&self) -> Result<GridShape, HarnessError> {
        GridShape::new(self.d, self.l).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// The two factors of a product grid.
    pub fn factors(&self) -> Result<(GridShape, GridShape), HarnessError> {
        let n = self.n.unwrap_or(self.d);
        let m = self.m.unwrap_or(self.d);
        let mk = |d| GridShape::new(d, self.l).map_err(|e| HarnessError::Config(e.to_string()));
        Ok((mk(n)?, mk(m)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorChoice {
    Identity,
    Maximal,
    Shift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaChoice {
    /// `‖E_ω g_ω‖` against the averaged square function.
    LowerSf,
    /// `(E_ω Σ_I (M Δ_{I,k} g)²)^{1/2}` against `g`.
    BlockSf,
    /// `(E_ω Σ_I |γ_I ⟨g⟩_I|² 1_I/|I|)^{1/2}` against `g`.
    Paraproduct,
    /// The vector-valued bilinear estimate with `s = q = 2`.
    Mz,
}

/// Experiment-specific knobs; all have defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentOptions {
    pub operator: OperatorChoice,
    /// Complexities cycled over trials.
    pub complexities: Vec<[u32; 3]>,
    pub lemma: LemmaChoice,
    /// `k` in `Δ_{I,k}`.
    pub block_k: u32,
    pub shift_mode: Option<ShiftMode>,
    /// Coefficient size as a fraction of the normalization bound.
    pub fill: f64,
    pub family: Option<FamilyMode>,
    /// Use `f = g` in `offdiag-ratio`.
    pub f_equals_g: bool,
    /// Inputs `≡ 1` instead of random functions.
    pub constant_input: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            operator: OperatorChoice::Shift,
            complexities: vec![[0, 0, 0], [1, 0, 0], [1, 1, 1]],
            lemma: LemmaChoice::BlockSf,
            block_k: 1,
            shift_mode: None,
            fill: 1.0,
            family: None,
            f_equals_g: false,
            constant_input: false,
        }
    }
}

fn default_k() -> usize {
    crate::rubio::DEFAULT_K
}

fn default_gen() -> WeightGen {
    WeightGen::LogUniform { spread: 1.0, seed: 0 }
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub grid: GridConfig,
    /// Named exponents; vectors are comma separated, e.g. `"p": "3,3"`.
    #[serde(default)]
    pub exponents: BTreeMap<String, String>,
    #[serde(default = "default_gen")]
    pub weight_gen: WeightGen,
    pub trials: usize,
    pub seed: u64,
    #[serde(rename = "K", default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub options: ExperimentOptions,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    fn raw(&self, key: &str) -> Result<&str, HarnessError> {
        self.exponents
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| HarnessError::Config(format!("exponent {key:?} missing for {}", self.experiment.name())))
    }

    pub fn scalar(&self, key: &str) -> Result<Exponent, HarnessError> {
        self.raw(key)?.trim().parse().map_err(|e| HarnessError::Config(format!("{key}: {e}")))
    }

    pub fn scalar_or(&self, key: &str, default: &str) -> Result<Exponent, HarnessError> {
        let raw = self.exponents.get(key).map_or(default, String::as_str);
        raw.trim().parse().map_err(|e| HarnessError::Config(format!("{key}: {e}")))
    }

    pub fn vector(&self, key: &str, kind: VectorKind) -> Result<ExponentVector, HarnessError> {
        self.vector_or(key, kind, None)
    }

    pub fn vector_or(&self, key: &str, kind: VectorKind, default: Option<&str>) -> Result<ExponentVector, HarnessError> {
        let raw = match (self.exponents.get(key), default) {
            (Some(v), _) => v.as_str(),
            (None, Some(d)) => d,
            (None, None) => self.raw(key)?,
        };
        let items: Vec<&str> = raw.split(',').map(str::trim).collect();
        ExponentVector::parse(kind, &items).map_err(|e| HarnessError::Config(format!("{key}: {e}")))
    }
}

/// The same generator with its seed replaced.
pub fn reseed(gen: &WeightGen, seed: u64) -> WeightGen {
    match *gen {
        WeightGen::Power { a } => WeightGen::Power { a },
        WeightGen::RandomA1 { delta, .. } => WeightGen::RandomA1 { delta, seed },
        WeightGen::LogUniform { spread, .. } => WeightGen::LogUniform { spread, seed },
    }
}

/// Seed of trial `t`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}
