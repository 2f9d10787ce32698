//! Surrogate-assisted illumination.
//!
//! Each iteration fits Gaussian process models of drag (`−ln C_D`) and lift
//! to the observations, illuminates an acquisition map under the models,
//! and spends precise evaluations on elites drawn from that map at
//! feature-space Sobol coordinates. The final prediction map is illuminated
//! under the predictive means.

use thiserror::Error;

use crate::airfoil::{area_penalty, probabilistic_lift_penalty, BaseFoilReference};
use crate::elites::{illuminate, map_stats, ElitesError, Evaluation, FeatureMap, FeatureSpec, IlluminationConfig};
use crate::evaluation::{EvaluationResult, Evaluator, EvaluatorError};
use crate::genome::{same_genome, Bounds};
use crate::gp::{fit_hyperparameters, GpError, GpModel, HyperSearchConfig, KernelParams, Prediction};
use crate::lds::SobolState;
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum SailError {
    #[error("surrogate: {0}")]
    Gp(#[from] GpError),
    #[error("illumination: {0}")]
    Elites(#[from] ElitesError),
    #[error("evaluator: {0}")]
    Evaluator(#[from] EvaluatorError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("only {found} of {needed} initial samples have valid geometry after {draws} Sobol draws")]
    Initialization { needed: usize, found: usize, draws: usize },
}

/// What SAIL needs from a design domain besides the precise evaluator.
pub trait Domain: Sync {
    fn bounds(&self) -> &Bounds;
    fn features(&self, genome: &[f64]) -> Vec<f64>;
    /// Simulation-free area; `None` for invalid geometry.
    fn area(&self, genome: &[f64]) -> Option<f64>;
    fn base(&self) -> &BaseFoilReference;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcquisitionKind {
    Ucb,
    MeanOnly,
    VarianceOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionConfig {
    pub kind: AcquisitionKind,
    pub kappa: f64,
}

pub const DEFAULT_KAPPA: f64 = 2.0;

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self::ucb(DEFAULT_KAPPA)
    }
}

impl AcquisitionConfig {
    pub fn ucb(kappa: f64) -> Self {
        Self {
            kind: AcquisitionKind::Ucb,
            kappa,
        }
    }

    /// Objective of the prediction map.
    pub fn prediction() -> Self {
        Self::ucb(0.0)
    }

    pub fn validate(&self) -> Result<(), SailError> {
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(SailError::Config(format!(
                "kappa must be finite and non-negative, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub genome: Vec<f64>,
    /// `−ln C_D`.
    pub drag: f64,
    pub lift: f64,
    pub area: f64,
    /// 0 for the initial samples.
    pub iteration: usize,
    /// Precise-evaluation count when this sample was evaluated (1-based).
    pub pe_index: usize,
}

/// Converged precise evaluations, without duplicate genomes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationSet {
    rows: Vec<Observation>,
}

pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

impl ObservationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, genome: &[f64]) -> bool {
        self.rows
            .iter()
            .any(|r| same_genome(&r.genome, genome, DUPLICATE_TOLERANCE))
    }

    /// Appends `obs` unless its values are non-finite or its genome is
    /// already present.
    pub fn push(&mut self, obs: Observation) -> bool {
        let finite = obs.drag.is_finite()
            && obs.lift.is_finite()
            && obs.area.is_finite()
            && obs.genome.iter().all(|v| v.is_finite());
        if !finite || self.contains(&obs.genome) {
            return false;
        }
        self.rows.push(obs);
        true
    }

    pub fn genomes(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.genome.clone()).collect()
    }

    /// Rows evaluated within the first `pe` precise evaluations.
    pub fn prefix_by_pe(&self, pe: usize) -> ObservationSet {
        Self {
            rows: self.rows.iter().filter(|r| r.pe_index <= pe).cloned().collect(),
        }
    }
}

/// Drag and lift models over bound-normalized genomes.
#[derive(Debug, Clone)]
pub struct Surrogates {
    bounds: Bounds,
    pub drag: GpModel,
    pub lift: GpModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogatePrediction {
    pub drag: Prediction,
    pub lift: Prediction,
}

fn normalized_inputs(obs: &ObservationSet, bounds: &Bounds) -> Vec<Vec<f64>> {
    obs.rows().iter().map(|r| bounds.normalize(&r.genome)).collect()
}

impl Surrogates {
    /// Trains both models with fixed hyperparameters.
    pub fn train(
        obs: &ObservationSet,
        bounds: &Bounds,
        drag: &KernelParams,
        lift: &KernelParams,
    ) -> Result<Self, GpError> {
        let x = normalized_inputs(obs, bounds);
        let drag_t: Vec<f64> = obs.rows().iter().map(|r| r.drag).collect();
        let lift_t: Vec<f64> = obs.rows().iter().map(|r| r.lift).collect();
        Ok(Self {
            bounds: bounds.clone(),
            drag: GpModel::train(&x, &drag_t, drag)?,
            lift: GpModel::train(&x, &lift_t, lift)?,
        })
    }

    /// Fits hyperparameters of both models by likelihood maximization, then
    /// trains. `warm` seeds the searches with its hyperparameters.
    pub fn fit(
        obs: &ObservationSet,
        bounds: &Bounds,
        hyper: &HyperSearchConfig,
        warm: Option<&Surrogates>,
        seed: u64,
    ) -> Result<Self, GpError> {
        let x = normalized_inputs(obs, bounds);
        let drag_t: Vec<f64> = obs.rows().iter().map(|r| r.drag).collect();
        let lift_t: Vec<f64> = obs.rows().iter().map(|r| r.lift).collect();
        let search = |targets: &[f64], warm: Option<&GpModel>, name: &str| {
            let cfg = HyperSearchConfig {
                input_ranges: Some(vec![1.0; bounds.dim()]),
                warm_start: warm.map(|m| m.params().clone()).or_else(|| hyper.warm_start.clone()),
                seed: derive_seed(seed, name, 0),
                ..hyper.clone()
            };
            fit_hyperparameters(&x, targets, &cfg)
        };
        let drag_fit = search(&drag_t, warm.map(|w| &w.drag), "hyper-drag")?;
        let lift_fit = search(&lift_t, warm.map(|w| &w.lift), "hyper-lift")?;
        Ok(Self {
            bounds: bounds.clone(),
            drag: GpModel::train(&x, &drag_t, &drag_fit.params)?,
            lift: GpModel::train(&x, &lift_t, &lift_fit.params)?,
        })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn predict(&self, genome: &[f64]) -> Result<SurrogatePrediction, GpError> {
        let u = self.bounds.normalize(genome);
        Ok(SurrogatePrediction {
            drag: self.drag.predict(&u)?,
            lift: self.lift.predict(&u)?,
        })
    }

    pub fn predict_drag_mean(&self, genome: &[f64]) -> Result<f64, GpError> {
        self.drag.predict_mean(&self.bounds.normalize(genome))
    }
}

/// Acquisition score of `genome`, `None` when its geometry is invalid.
///
/// UCB and mean-only compose `drag′ · penalty_lift · penalty_area` with the
/// lift penalty taken from the lift model's predictive distribution and the
/// area penalty measured on the geometry. Variance-only returns `σ_drag`.
pub fn acquisition_value<D: Domain + ?Sized>(
    models: &Surrogates,
    genome: &[f64],
    cfg: &AcquisitionConfig,
    domain: &D,
) -> Option<f64> {
    let area = domain.area(genome)?;
    let p = models.predict(genome).ok()?;
    let value = match cfg.kind {
        AcquisitionKind::VarianceOnly => p.drag.std_dev(),
        kind => {
            let drag = match kind {
                AcquisitionKind::Ucb => p.drag.mean + cfg.kappa * p.drag.std_dev(),
                _ => p.drag.mean,
            };
            let base = domain.base();
            drag * probabilistic_lift_penalty(p.lift.mean, p.lift.std_dev(), base.lift_base)
                * area_penalty(area, base.area_base)
        }
    };
    value.is_finite().then_some(value)
}

/// Illuminates `spec` under the acquisition function, seeded with every
/// observed genome. No precise evaluations are made.
pub fn produce_acquisition_map<D: Domain + ?Sized>(
    models: &Surrogates,
    obs: &ObservationSet,
    domain: &D,
    spec: &FeatureSpec,
    acquisition: &AcquisitionConfig,
    illumination: &IlluminationConfig,
) -> Result<FeatureMap, SailError> {
    acquisition.validate()?;
    let objective = |g: &[f64]| {
        acquisition_value(models, g, acquisition, domain).map(|value| Evaluation {
            value,
            features: domain.features(g),
        })
    };
    Ok(illuminate(
        &objective,
        domain.bounds(),
        spec,
        &obs.genomes(),
        illumination,
    )?)
}

/// The acquisition map with `κ = 0`: predictive means, lift penalty from the
/// lift model's distribution.
pub fn produce_prediction_map<D: Domain + ?Sized>(
    models: &Surrogates,
    obs: &ObservationSet,
    domain: &D,
    spec: &FeatureSpec,
    illumination: &IlluminationConfig,
) -> Result<FeatureMap, SailError> {
    produce_acquisition_map(
        models,
        obs,
        domain,
        spec,
        &AcquisitionConfig::prediction(),
        illumination,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub genomes: Vec<Vec<f64>>,
    /// Fewer than the requested number of elites were found.
    pub starved: bool,
}

/// Draws feature-space Sobol points and returns the elites of the first `n`
/// distinct occupied cells whose elites have not been observed. Gives up
/// after `10 · n · cells` draws.
pub fn select_samples(map: &FeatureMap, sobol: &mut SobolState, n: usize, obs: &ObservationSet) -> Selection {
    let spec = map.spec();
    let mut genomes = Vec::with_capacity(n);
    let mut taken = Vec::with_capacity(n);
    let limit = 10 * n * spec.total_cells();
    let mut draws = 0;
    while genomes.len() < n && draws < limit {
        draws += 1;
        let features = spec.from_unit(&sobol.next_point());
        let Ok(cell) = spec.niche(&features) else {
            continue;
        };
        let flat = spec.flat_index(&cell);
        if taken.contains(&flat) {
            continue;
        }
        let Some(elite) = map.get_flat(flat) else {
            continue;
        };
        if obs.contains(&elite.genome) {
            continue;
        }
        taken.push(flat);
        genomes.push(elite.genome.clone());
    }
    Selection {
        starved: genomes.len() < n,
        genomes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Elites of the acquisition map at feature-space Sobol coordinates.
    AcquisitionMap,
    /// Continue the parameter-space Sobol sequence; no models in the loop.
    ParameterSobol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SailConfig {
    pub pe_budget: usize,
    pub init_count: usize,
    pub batch_size: usize,
    pub features: FeatureSpec,
    pub acquisition: AcquisitionConfig,
    pub sampler: Sampler,
    /// Inner MAP-Elites runs on the acquisition map.
    pub illumination: IlluminationConfig,
    /// Inner MAP-Elites run of the final prediction map.
    pub prediction_illumination: IlluminationConfig,
    pub hyper: HyperSearchConfig,
    /// Refit hyperparameters every this many iterations and retrain with the
    /// previous ones in between.
    pub hyper_refit_every: usize,
    /// Build a prediction map for the stats every this many iterations
    /// (0 disables).
    pub prediction_stats_every: usize,
    pub seed: u64,
}

impl SailConfig {
    pub fn new(features: FeatureSpec) -> Self {
        Self {
            pe_budget: 1000,
            init_count: 50,
            batch_size: 10,
            features,
            acquisition: AcquisitionConfig::default(),
            sampler: Sampler::AcquisitionMap,
            illumination: IlluminationConfig::default(),
            prediction_illumination: IlluminationConfig::default(),
            hyper: HyperSearchConfig::default(),
            hyper_refit_every: 1,
            prediction_stats_every: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SailError> {
        self.acquisition.validate()?;
        if self.init_count == 0 || self.init_count > self.pe_budget {
            return Err(SailError::Config(format!(
                "init_count must be in 1..={}, got {}",
                self.pe_budget, self.init_count
            )));
        }
        if self.batch_size == 0 {
            return Err(SailError::Config("batch_size must be positive".into()));
        }
        if self.hyper_refit_every == 0 {
            return Err(SailError::Config("hyper_refit_every must be positive".into()));
        }
        Ok(())
    }

    /// Loop iterations a full run executes.
    pub fn iterations(&self) -> usize {
        (self.pe_budget - self.init_count).div_ceil(self.batch_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    pub pe_used: usize,
    pub observations: usize,
    /// `None` for the parameter-Sobol sampler, which builds no map.
    pub acquisition_coverage: Option<f64>,
    pub prediction_value_sum: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SailResult {
    pub observations: ObservationSet,
    pub models: Surrogates,
    pub prediction_map: FeatureMap,
    pub stats: Vec<IterationStats>,
    pub pe_used: usize,
    pub iterations: usize,
    /// Sample selection starved and the loop stopped early.
    pub starved: bool,
}

/// Offset into a Sobol sequence, so that seeds draw different stretches.
fn sobol_offset(seed: u64, name: &str) -> u64 {
    derive_seed(seed, name, 0) % 4096
}

fn evaluate_into<E: Evaluator + ?Sized, D: Domain + ?Sized>(
    evaluator: &E,
    domain: &D,
    genomes: &[Vec<f64>],
    iteration: usize,
    pe_used: &mut usize,
    obs: &mut ObservationSet,
) -> Result<(), SailError> {
    let results = evaluator.evaluate_batch(genomes);
    for (g, r) in genomes.iter().zip(results) {
        *pe_used += 1;
        let EvaluationResult::Converged(c) = r? else {
            continue;
        };
        let Some(area) = domain.area(g) else {
            continue;
        };
        obs.push(Observation {
            genome: g.clone(),
            drag: -c.cd.ln(),
            lift: c.cl,
            area,
            iteration,
            pe_index: *pe_used,
        });
    }
    Ok(())
}

/// Draws valid-geometry genomes from a parameter-space Sobol stream.
/// Invalid points are skipped without cost.
fn draw_valid<D: Domain + ?Sized>(
    domain: &D,
    sobol: &mut SobolState,
    n: usize,
    obs: &ObservationSet,
) -> Result<Vec<Vec<f64>>, SailError> {
    let limit = 1000 * n.max(1);
    let mut out = Vec::with_capacity(n);
    let mut draws = 0;
    while out.len() < n {
        if draws == limit {
            return Err(SailError::Initialization {
                needed: n,
                found: out.len(),
                draws,
            });
        }
        draws += 1;
        let g = domain.bounds().denormalize(&sobol.next_point());
        if domain.area(&g).is_some() && !obs.contains(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Runs the full loop until the precise-evaluation budget is spent.
pub fn run_sail<D, E>(cfg: &SailConfig, domain: &D, evaluator: &E) -> Result<SailResult, SailError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    cfg.validate()?;
    let bounds = domain.bounds();
    let mut obs = ObservationSet::new();
    let mut pe_used = 0;

    let mut param_sobol = SobolState::new(bounds.dim()).map_err(|e| SailError::Config(e.to_string()))?;
    param_sobol.advance(sobol_offset(cfg.seed, "parameter-sobol"));
    let mut feature_sobol = SobolState::new(cfg.features.dim()).map_err(|e| SailError::Config(e.to_string()))?;
    feature_sobol.advance(sobol_offset(cfg.seed, "feature-sobol"));

    let initial = draw_valid(domain, &mut param_sobol, cfg.init_count, &obs)?;
    evaluate_into(evaluator, domain, &initial, 0, &mut pe_used, &mut obs)?;

    // models and the number of observations they were trained on
    let mut models: Option<(Surrogates, usize)> = None;
    let mut stats = Vec::new();
    let mut iteration = 0;
    let mut starved = false;
    while pe_used < cfg.pe_budget {
        iteration += 1;
        let n = cfg.batch_size.min(cfg.pe_budget - pe_used);
        let mut coverage = None;
        let batch = match cfg.sampler {
            Sampler::ParameterSobol => draw_valid(domain, &mut param_sobol, n, &obs)?,
            Sampler::AcquisitionMap => {
                let current = current_models(cfg, bounds, &obs, &mut models, iteration)?;
                let illumination = IlluminationConfig {
                    seed: derive_seed(cfg.seed, "acquisition", iteration as u64),
                    ..cfg.illumination.clone()
                };
                let map =
                    produce_acquisition_map(current, &obs, domain, &cfg.features, &cfg.acquisition, &illumination)?;
                coverage = Some(map_stats(&map).coverage);
                let selection = select_samples(&map, &mut feature_sobol, n, &obs);
                starved = selection.starved;
                selection.genomes
            }
        };
        if batch.is_empty() {
            break;
        }
        evaluate_into(evaluator, domain, &batch, iteration, &mut pe_used, &mut obs)?;

        let prediction_value_sum = if cfg.prediction_stats_every > 0 && iteration % cfg.prediction_stats_every == 0 {
            let m = current_models(cfg, bounds, &obs, &mut models, iteration + 1)?;
            let map = prediction_map(cfg, domain, m, &obs, iteration)?;
            Some(map_stats(&map).value_sum)
        } else {
            None
        };
        stats.push(IterationStats {
            iteration,
            pe_used,
            observations: obs.len(),
            acquisition_coverage: coverage,
            prediction_value_sum,
        });
        if starved {
            break;
        }
    }

    current_models(cfg, bounds, &obs, &mut models, iteration + 1)?;
    let (final_models, _) = models.expect("models were just trained");
    let prediction_map = prediction_map(cfg, domain, &final_models, &obs, 0)?;
    Ok(SailResult {
        observations: obs,
        models: final_models,
        prediction_map,
        stats,
        pe_used,
        iterations: iteration,
        starved,
    })
}

/// Models for the current observations, trained at most once per
/// observation count. Hyperparameters are refit on the configured schedule
/// and warm-started from the previous models.
fn current_models<'a>(
    cfg: &SailConfig,
    bounds: &Bounds,
    obs: &ObservationSet,
    cache: &'a mut Option<(Surrogates, usize)>,
    iteration: usize,
) -> Result<&'a Surrogates, SailError> {
    let stale = cache.as_ref().is_none_or(|(_, rows)| *rows != obs.len());
    if stale {
        let previous = cache.take().map(|(m, _)| m);
        let m = fit_models(cfg, bounds, obs, previous.as_ref(), iteration)?;
        *cache = Some((m, obs.len()));
    }
    Ok(&cache.as_ref().expect("cache filled").0)
}

fn fit_models(
    cfg: &SailConfig,
    bounds: &Bounds,
    obs: &ObservationSet,
    previous: Option<&Surrogates>,
    iteration: usize,
) -> Result<Surrogates, SailError> {
    let seed = derive_seed(cfg.seed, "hyper", iteration as u64);
    let refit = iteration % cfg.hyper_refit_every == 1 % cfg.hyper_refit_every;
    Ok(match previous {
        Some(p) if !refit => Surrogates::train(obs, bounds, p.drag.params(), p.lift.params())?,
        _ => Surrogates::fit(obs, bounds, &cfg.hyper, previous, seed)?,
    })
}

fn prediction_map<D: Domain + ?Sized>(
    cfg: &SailConfig,
    domain: &D,
    models: &Surrogates,
    obs: &ObservationSet,
    iteration: usize,
) -> Result<FeatureMap, SailError> {
    let illumination = IlluminationConfig {
        seed: derive_seed(cfg.seed, "prediction", iteration as u64),
        ..cfg.prediction_illumination.clone()
    };
    produce_prediction_map(models, obs, domain, &cfg.features, &illumination)
}

/// Fitness of `genome` under the precise evaluator, `None` when the
/// geometry is invalid or the evaluation does not converge.
pub fn precise_fitness<D, E>(domain: &D, evaluator: &E, genome: &[f64]) -> Result<Option<f64>, EvaluatorError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    let Some(area) = domain.area(genome) else {
        return Ok(None);
    };
    Ok(evaluator
        .evaluate(genome)?
        .coefficients()
        .map(|c| crate::airfoil::fitness(-c.cd.ln(), c.cl, area, domain.base())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elites::FeatureAxis;

    fn obs(genome: Vec<f64>, drag: f64) -> Observation {
        Observation {
            genome,
            drag,
            lift: 0.5,
            area: 0.1,
            iteration: 0,
            pe_index: 1,
        }
    }

    #[test]
    fn observation_set_rejects_duplicates_and_non_finite() {
        let mut s = ObservationSet::new();
        assert!(s.push(obs(vec![0.1, 0.2], 1.0)));
        assert!(!s.push(obs(vec![0.1, 0.2 + 1e-13], 2.0)));
        assert!(s.push(obs(vec![0.1, 0.2 + 1e-9], 2.0)));
        assert!(!s.push(obs(vec![0.3, 0.2], f64::NAN)));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn iteration_count() {
        let spec = FeatureSpec::new(vec![FeatureAxis::new("a", 0.0, 1.0, 5)]).unwrap();
        let mut cfg = SailConfig::new(spec);
        assert_eq!(cfg.iterations(), 95);
        cfg.pe_budget = 50;
        assert_eq!(cfg.iterations(), 0);
        cfg.pe_budget = 55;
        assert_eq!(cfg.iterations(), 1);
        cfg.init_count = 0;
        assert!(cfg.validate().is_err());
        cfg.init_count = 50;
        cfg.acquisition.kappa = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn select_from_empty_request() {
        let spec = FeatureSpec::new(vec![FeatureAxis::new("a", 0.0, 1.0, 5)]).unwrap();
        let map = FeatureMap::new(spec);
        let mut sobol = SobolState::new(1).unwrap();
        let s = select_samples(&map, &mut sobol, 0, &ObservationSet::new());
        assert!(s.genomes.is_empty() && !s.starved);
        assert_eq!(sobol.index(), 0);
        let s = select_samples(&map, &mut sobol, 2, &ObservationSet::new());
        assert!(s.genomes.is_empty() && s.starved);
        assert_eq!(sobol.index(), 100);
    }
}
