//! Command-line experiments: configuration, run persistence and the
//! SAIL versus MAP-Elites and sampling comparisons.

pub mod commands;
pub mod config;
pub mod io;
pub mod study;

use sail::airfoil::AirfoilGeometry;
use sail::evaluation::{EvaluationResult, Evaluator, EvaluatorError, ExternalEvaluator, SyntheticEvaluator};
use sail::sail::SailError;
use thiserror::Error;

use crate::config::Config;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("evaluator error: {0}")]
    Evaluator(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Csv(_) => 2,
            Self::Evaluator(_) => 3,
            Self::Io(_) | Self::Run(_) => 1,
        }
    }
}

impl From<SailError> for HarnessError {
    fn from(e: SailError) -> Self {
        match e {
            SailError::Evaluator(e) => Self::Evaluator(e.to_string()),
            SailError::Config(m) => Self::Config(m),
            other => Self::Run(other.to_string()),
        }
    }
}

impl From<EvaluatorError> for HarnessError {
    fn from(e: EvaluatorError) -> Self {
        match e {
            EvaluatorError::Config(m) => Self::Config(m),
            other => Self::Evaluator(other.to_string()),
        }
    }
}

/// The evaluator selected by `evaluator.kind`.
pub enum AnyEvaluator {
    Synthetic(SyntheticEvaluator),
    External(ExternalEvaluator),
}

impl AnyEvaluator {
    pub fn from_config(cfg: &Config, geometry: &AirfoilGeometry) -> Result<Self, HarnessError> {
        match cfg.get("evaluator.kind") {
            "synthetic" => Ok(Self::Synthetic(SyntheticEvaluator::new(cfg.bounds()?))),
            "external" => Ok(Self::External(ExternalEvaluator::new(
                cfg.external()?,
                geometry.clone(),
            )?)),
            other => Err(HarnessError::Config(format!("unknown evaluator.kind `{other}`"))),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, Self::Synthetic(_))
    }
}

impl Evaluator for AnyEvaluator {
    fn evaluate(&self, genome: &[f64]) -> Result<EvaluationResult, EvaluatorError> {
        match self {
            Self::Synthetic(e) => e.evaluate(genome),
            Self::External(e) => e.evaluate(genome),
        }
    }

    fn evaluate_batch(&self, genomes: &[Vec<f64>]) -> Vec<Result<EvaluationResult, EvaluatorError>> {
        match self {
            Self::Synthetic(e) => e.evaluate_batch(genomes),
            Self::External(e) => e.evaluate_batch(genomes),
        }
    }
}
