//! Precise-evaluation backends.
//!
//! [`SyntheticEvaluator`] is a closed-form stand-in with known structure for
//! desk-scale experiments. [`ExternalEvaluator`] drives an external flow
//! solver through a command template and parses one line of its output.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use regex::Regex;
use thiserror::Error;

use crate::airfoil::{
    write_selig, AirfoilGeometry, BaseFoilReference, FlowConditions, FoilCoords, PARAMETER_NAMES, X_UP, Z_UP,
};
use crate::genome::Bounds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub cd: f64,
    pub cl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvaluationResult {
    Converged(Coefficients),
    NotConverged,
}

impl EvaluationResult {
    pub fn coefficients(&self) -> Option<Coefficients> {
        match self {
            Self::Converged(c) => Some(*c),
            Self::NotConverged => None,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self, Self::Converged(_))
    }
}

#[derive(Debug, Error)]
pub enum EvaluatorError {
    #[error("failed to start evaluator command `{command}`: {source}")]
    Spawn { command: String, source: io::Error },
    #[error("evaluator I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid genome: {0}")]
    Genome(String),
    #[error("evaluator configuration: {0}")]
    Config(String),
}

/// A precise (expensive) objective. Calls must be independent of each
/// other so batches can run concurrently.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &[f64]) -> Result<EvaluationResult, EvaluatorError>;

    fn evaluate_batch(&self, genomes: &[Vec<f64>]) -> Vec<Result<EvaluationResult, EvaluatorError>> {
        genomes.par_iter().map(|g| self.evaluate(g)).collect()
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, genome: &[f64]) -> Result<EvaluationResult, EvaluatorError> {
        (**self).evaluate(genome)
    }

    fn evaluate_batch(&self, genomes: &[Vec<f64>]) -> Vec<Result<EvaluationResult, EvaluatorError>> {
        (**self).evaluate_batch(genomes)
    }
}

/// Counts every call into the wrapped evaluator, converged or not.
pub struct Counting<E> {
    inner: E,
    calls: AtomicU64,
}

impl<E: Evaluator> Counting<E> {
    pub fn new(inner: E) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Evaluator> Evaluator for Counting<E> {
    fn evaluate(&self, genome: &[f64]) -> Result<EvaluationResult, EvaluatorError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(genome)
    }

    fn evaluate_batch(&self, genomes: &[Vec<f64>]) -> Vec<Result<EvaluationResult, EvaluatorError>> {
        self.calls.fetch_add(genomes.len() as u64, Ordering::SeqCst);
        self.inner.evaluate_batch(genomes)
    }
}

const SYNTHETIC_DATA: &str = include_str!("../data/synthetic_aero.txt");

pub const SYNTHETIC_DRAG_FLOOR: f64 = 0.004;

/// Weights, centers and the non-converging corner of the synthetic model.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub weights: Vec<f64>,
    pub centers: Vec<f64>,
    /// Non-converged when `u_x_up < corner.0` and `u_z_up > corner.1`.
    pub corner: (f64, f64),
}

impl SyntheticParams {
    pub fn parse(text: &str) -> Result<Self, EvaluatorError> {
        let mut weights = vec![f64::NAN; PARAMETER_NAMES.len()];
        let mut centers = weights.clone();
        let mut corner = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || EvaluatorError::Config(format!("synthetic data line {}: `{line}`", i + 1));
            let mut f = line.split_whitespace();
            let name = f.next().ok_or_else(bad)?;
            let a: f64 = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let b: f64 = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if name == "corner" {
                corner = Some((a, b));
            } else {
                let d = PARAMETER_NAMES.iter().position(|n| *n == name).ok_or_else(bad)?;
                weights[d] = a;
                centers[d] = b;
            }
        }
        if weights.iter().chain(&centers).any(|v| !v.is_finite()) {
            return Err(EvaluatorError::Config("synthetic data misses a parameter".into()));
        }
        let corner = corner.ok_or_else(|| EvaluatorError::Config("synthetic data misses the corner".into()))?;
        Ok(Self {
            weights,
            centers,
            corner,
        })
    }

    pub fn shipped() -> Self {
        Self::parse(SYNTHETIC_DATA).expect("shipped synthetic data parses")
    }
}

/// Closed-form pseudo-aerodynamics. The result depends only on the genome.
#[derive(Debug, Clone)]
pub struct SyntheticEvaluator {
    bounds: Bounds,
    params: SyntheticParams,
}

impl SyntheticEvaluator {
    pub fn new(bounds: Bounds) -> Self {
        Self::with_params(bounds, SyntheticParams::shipped())
    }

    pub fn with_params(bounds: Bounds, params: SyntheticParams) -> Self {
        Self { bounds, params }
    }

    pub fn params(&self) -> &SyntheticParams {
        &self.params
    }

    pub fn coefficients(&self, genome: &[f64]) -> EvaluationResult {
        let u = self.bounds.normalize(genome);
        let (corner_x, corner_z) = self.params.corner;
        if u[X_UP] < corner_x && u[Z_UP] > corner_z {
            return EvaluationResult::NotConverged;
        }
        let q: f64 = u
            .iter()
            .zip(self.params.weights.iter().zip(&self.params.centers))
            .map(|(u, (w, c))| w * (u - c) * (u - c))
            .sum();
        let cd = SYNTHETIC_DRAG_FLOOR * (1.0 + q);
        let cl = 0.2 + 0.9 * u[Z_UP] - 0.35 * (u[X_UP] - 0.55).powi(2);
        EvaluationResult::Converged(Coefficients { cd, cl })
    }
}

impl Evaluator for SyntheticEvaluator {
    fn evaluate(&self, genome: &[f64]) -> Result<EvaluationResult, EvaluatorError> {
        if genome.len() != self.bounds.dim() {
            return Err(EvaluatorError::Genome(format!(
                "expected {} parameters, got {}",
                self.bounds.dim(),
                genome.len()
            )));
        }
        Ok(self.coefficients(genome))
    }
}

#[derive(Debug, Error)]
pub enum BaseError {
    #[error(transparent)]
    Evaluator(#[from] EvaluatorError),
    #[error("base foil geometry: {0}")]
    Geometry(String),
    #[error("base foil evaluation did not converge")]
    NotConverged,
}

/// Measures the base foil's area and evaluates its lift once.
pub fn evaluate_base<E: Evaluator + ?Sized>(
    evaluator: &E,
    geometry: &AirfoilGeometry,
    base_genome: &[f64],
) -> Result<BaseFoilReference, BaseError> {
    let (_, area) = geometry
        .shape(base_genome)
        .map_err(|e| BaseError::Geometry(e.to_string()))?;
    let c = evaluator
        .evaluate(base_genome)?
        .coefficients()
        .ok_or(BaseError::NotConverged)?;
    BaseFoilReference::new(area, c.cl).ok_or_else(|| BaseError::Geometry(format!("area {area}, lift {}", c.cl)))
}

/// Default polar line pattern: the first two numbers after `CD` and `CL`
/// labels, in either order, e.g. `CL = 0.512  CD = 0.0061`.
pub const DEFAULT_POLAR_PATTERN: &str = r"(?i)(?:CD\s*[=:]?\s*(?P<cd>[-+0-9.eE]+).*?CL\s*[=:]?\s*(?P<cl>[-+0-9.eE]+))|(?:CL\s*[=:]?\s*(?P<cl2>[-+0-9.eE]+).*?CD\s*[=:]?\s*(?P<cd2>[-+0-9.eE]+))";

#[derive(Debug, Clone)]
pub struct ExternalConfig {
    /// Whitespace-separated command line with `{input}`, `{output}`, `{aoa}`,
    /// `{mach}` and `{reynolds}` placeholders.
    pub command: String,
    /// Parent for the per-call scratch directories; system temp if unset.
    pub working_dir: Option<PathBuf>,
    pub timeout: Duration,
    /// Matched against each output line; needs `cd` and `cl` captures.
    pub polar_pattern: String,
    pub max_concurrency: usize,
    pub flow: FlowConditions,
}

impl ExternalConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            working_dir: None,
            timeout: Duration::from_secs(30),
            polar_pattern: DEFAULT_POLAR_PATTERN.to_string(),
            max_concurrency: 1,
            flow: FlowConditions::default(),
        }
    }
}

pub struct ExternalEvaluator {
    cfg: ExternalConfig,
    geometry: AirfoilGeometry,
    pattern: Regex,
}

impl ExternalEvaluator {
    pub fn new(cfg: ExternalConfig, geometry: AirfoilGeometry) -> Result<Self, EvaluatorError> {
        if !cfg.command.contains("{input}") || !cfg.command.contains("{output}") {
            return Err(EvaluatorError::Config(
                "command template needs {input} and {output} placeholders".into(),
            ));
        }
        let pattern =
            Regex::new(&cfg.polar_pattern).map_err(|e| EvaluatorError::Config(format!("polar pattern: {e}")))?;
        let names: Vec<_> = pattern.capture_names().flatten().collect();
        if !names.contains(&"cd") || !names.contains(&"cl") {
            return Err(EvaluatorError::Config(
                "polar pattern needs `cd` and `cl` captures".into(),
            ));
        }
        if cfg.max_concurrency == 0 {
            return Err(EvaluatorError::Config("max_concurrency must be positive".into()));
        }
        Ok(Self { cfg, geometry, pattern })
    }

    pub fn config(&self) -> &ExternalConfig {
        &self.cfg
    }

    fn command_line(&self, input: &Path, output: &Path) -> Vec<String> {
        let flow = &self.cfg.flow;
        self.cfg
            .command
            .split_whitespace()
            .map(|tok| {
                tok.replace("{input}", &input.to_string_lossy())
                    .replace("{output}", &output.to_string_lossy())
                    .replace("{aoa}", &flow.angle_of_attack.to_string())
                    .replace("{mach}", &flow.mach.to_string())
                    .replace("{reynolds}", &flow.reynolds.to_string())
            })
            .collect()
    }

    /// Parses the first matching output line.
    pub fn parse_polar(&self, text: &str) -> EvaluationResult {
        for line in text.lines() {
            let Some(caps) = self.pattern.captures(line) else {
                continue;
            };
            let get = |a: &str, b: &str| {
                caps.name(a)
                    .or_else(|| caps.name(b))
                    .and_then(|m| m.as_str().parse::<f64>().ok())
            };
            return match (get("cd", "cd2"), get("cl", "cl2")) {
                (Some(cd), Some(cl)) if cd.is_finite() && cd > 0.0 && cl.is_finite() => {
                    EvaluationResult::Converged(Coefficients { cd, cl })
                }
                _ => EvaluationResult::NotConverged,
            };
        }
        EvaluationResult::NotConverged
    }

    pub fn evaluate_coords(&self, coords: &FoilCoords) -> Result<EvaluationResult, EvaluatorError> {
        let scratch = match &self.cfg.working_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                tempfile::Builder::new().prefix("sail-eval").tempdir_in(dir)?
            }
            None => tempfile::Builder::new().prefix("sail-eval").tempdir()?,
        };
        let input = scratch.path().join("foil.dat");
        let output = scratch.path().join("polar.txt");
        fs::write(&input, write_selig("candidate", coords))?;
        let argv = self.command_line(&input, &output);
        let Some((program, args)) = argv.split_first() else {
            return Err(EvaluatorError::Config("empty command template".into()));
        };
        let mut child = Command::new(program)
            .args(args)
            .current_dir(scratch.path())
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| EvaluatorError::Spawn {
                command: program.clone(),
                source,
            })?;
        let deadline = Instant::now() + self.cfg.timeout;
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        if status.is_none() {
            return Ok(EvaluationResult::NotConverged);
        }
        Ok(match fs::read_to_string(&output) {
            Ok(text) => self.parse_polar(&text),
            Err(_) => EvaluationResult::NotConverged,
        })
    }
}

impl Evaluator for ExternalEvaluator {
    /// Invalid geometry cannot be written as a coordinate file and is an
    /// error here; callers screen genomes first.
    fn evaluate(&self, genome: &[f64]) -> Result<EvaluationResult, EvaluatorError> {
        let coords = self
            .geometry
            .coords(genome)
            .map_err(|e| EvaluatorError::Genome(e.to_string()))?;
        self.evaluate_coords(&coords)
    }

    fn evaluate_batch(&self, genomes: &[Vec<f64>]) -> Vec<Result<EvaluationResult, EvaluatorError>> {
        let results: Vec<Mutex<Option<Result<EvaluationResult, EvaluatorError>>>> =
            genomes.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.cfg.max_concurrency.min(genomes.len()).max(1);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= genomes.len() {
                        break;
                    }
                    let r = self.evaluate(&genomes[i]);
                    *results[i].lock().expect("result slot") = Some(r);
                });
            }
        });
        results
            .into_iter()
            .map(|m| m.into_inner().expect("result slot").expect("every slot filled"))
            .collect()
    }
}
