use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    /// The weight-class constant (or complexity) the ratio is plotted against.
    pub constant: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl TrialRow {
    pub fn new(trial: usize, seed: u64, constant: f64, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs == 0.0 && lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self { trial, seed, constant, lhs, rhs, ratio }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecileEnvelope {
    pub decile: usize,
    pub constant_min: f64,
    pub constant_max: f64,
    pub count: usize,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub trial: usize,
    pub seed: u64,
    pub constant: f64,
    pub ratio: f64,
    /// Replay with the same config, `trials = 1` and this seed.
    pub replay: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub cube_family: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub trials: usize,
    pub seed: u64,
    pub max_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub argmax: Option<Argmax>,
    pub envelope_by_constant_decile: Vec<DecileEnvelope>,
    pub environment: Environment,
    pub notes: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

pub const CSV_HEADER: &str = "trial,seed,constant,lhs,rhs,ratio";

fn envelope(rows: &[TrialRow]) -> Vec<DecileEnvelope> {
    let mut sorted: Vec<&TrialRow> = rows.iter().filter(|r| r.ratio.is_finite()).collect();
    sorted.sort_by(|a, b| a.constant.total_cmp(&b.constant).then(a.trial.cmp(&b.trial)));
    let n = sorted.len();
    let groups = n.min(10);
    (0..groups)
        .map(|g| {
            let chunk = &sorted[g * n / groups..(g + 1) * n / groups];
            DecileEnvelope {
                decile: g + 1,
                constant_min: chunk[0].constant,
                constant_max: chunk[chunk.len() - 1].constant,
                count: chunk.len(),
                max_ratio: chunk.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

impl Report {
    pub fn new(config: &ExperimentConfig, rows: Vec<TrialRow>, cube_family: &str, notes: Vec<String>) -> Self {
        let finite: Vec<&TrialRow> = rows.iter().filter(|r| r.ratio.is_finite()).collect();
        let argmax = finite.iter().copied().fold(None::<&TrialRow>, |best, r| match best {
            Some(b) if b.ratio >= r.ratio => Some(b),
            _ => Some(r),
        });
        let mut ratios: Vec<f64> = finite.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let median = match ratios.len() {
            0 => None,
            n if n % 2 == 1 => Some(ratios[n / 2]),
            n => Some(0.5 * (ratios[n / 2 - 1] + ratios[n / 2])),
        };
        let summary = Summary {
            experiment: config.experiment.name().to_string(),
            trials: config.trials,
            seed: config.seed,
            max_ratio: argmax.map(|r| r.ratio),
            median_ratio: median,
            argmax: argmax.map(|r| Argmax {
                trial: r.trial,
                seed: r.seed,
                constant: r.constant,
                ratio: r.ratio,
                replay: format!("seed={} trials=1", r.seed),
            }),
            envelope_by_constant_decile: envelope(&rows),
            environment: Environment {
                package: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                cube_family: cube_family.to_string(),
            },
            notes,
            config: config.clone(),
        };
        Self { rows, summary }
    }

    pub fn csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
    }

    pub fn json(&self) -> Result<String, HarnessError> {
        serde_json::to_string_pretty(&self.summary).map_err(|e| HarnessError::Io(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
    pub fn write(&self, stem: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
        if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let csv_path = stem.with_extension("csv");
        let json_path = stem.with_extension("json");
        std::fs::write(&csv_path, self.csv()?)?;
        std::fs::write(&json_path, self.json()? + "\n")?;
        Ok((csv_path, json_path))
    }
}
