//! Seeded ratio experiments and the invariant batteries behind `verify`.

mod config;
mod experiments;
mod report;
mod verify;

use thiserror::Error;

pub use config::{
    reseed, trial_seed, ExperimentConfig, ExperimentKind, ExperimentOptions, GridConfig, LemmaChoice, OperatorChoice,
};
pub use experiments::{run_experiment, validate};
pub use report::{Argmax, DecileEnvelope, Environment, Report, Summary, TrialRow, CSV_HEADER};
pub use verify::{
    case_battery, dyadic_battery, exponent_identities, lemma_main_battery, monitor_envelopes, norms_battery,
    operator_battery, rdf_battery, rescaling_identities, sparse_battery, verify_suite, BatteryResult, MonitorPoint,
    MonitorReport, Suite, SuiteReport, VerifyOptions,
};

use crate::dyadic::DyadicError;
use crate::exponents::ExponentError;
use crate::operators::OperatorError;
use crate::rubio::RubioError;
use crate::weights::WeightError;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Rejected before any numerics.
    #[error("config error: {0}")]
    Config(String),
    #[error("config error: {0}")]
    Exponents(#[from] ExponentError),
    #[error(transparent)]
    Grid(#[from] DyadicError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Operators(#[from] OperatorError),
    #[error(transparent)]
    Rubio(#[from] RubioError),
    #[error("io: {0}")]
    Io(String),
}

impl HarnessError {
    /// Bad input as opposed to a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::Exponents(_))
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests;
