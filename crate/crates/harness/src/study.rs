//! Experiment recipes shared by the CLI and the acceptance suite.

use sail::benchmark::CellOptimum;
use sail::evaluation::Evaluator;
use sail::rng::derive_seed;
use sail::sail::{
    run_sail, AcquisitionConfig, AcquisitionKind, Domain, ObservationSet, SailConfig, SailError, Sampler, Surrogates,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudySampler {
    ParameterSobol,
    Mean,
    Variance,
    Ucb,
}

impl StudySampler {
    pub const ALL: [StudySampler; 4] = [Self::ParameterSobol, Self::Mean, Self::Variance, Self::Ucb];

    pub fn name(self) -> &'static str {
        match self {
            Self::ParameterSobol => "parameter-sobol",
            Self::Mean => "mean",
            Self::Variance => "variance",
            Self::Ucb => "ucb",
        }
    }

    /// `base` with this sampler's sampling rule.
    pub fn configure(self, base: &SailConfig) -> SailConfig {
        let mut cfg = base.clone();
        let kappa = base.acquisition.kappa;
        cfg.sampler = Sampler::AcquisitionMap;
        cfg.acquisition = match self {
            Self::ParameterSobol => {
                cfg.sampler = Sampler::ParameterSobol;
                base.acquisition
            }
            Self::Mean => AcquisitionConfig {
                kind: AcquisitionKind::MeanOnly,
                kappa,
            },
            Self::Variance => AcquisitionConfig {
                kind: AcquisitionKind::VarianceOnly,
                kappa,
            },
            Self::Ucb => AcquisitionConfig::ucb(kappa),
        };
        cfg
    }
}

/// Mean squared error of the drag model's mean at each reachable optimum
/// genome against the precise `−ln C_D`. Optima whose true evaluation does
/// not converge are skipped.
pub fn drag_mse<E: Evaluator + ?Sized>(
    models: &Surrogates,
    optima: &[Option<CellOptimum>],
    evaluator: &E,
) -> Result<f64, SailError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for o in optima.iter().flatten() {
        let Some(c) = evaluator.evaluate(&o.genome)?.coefficients() else {
            continue;
        };
        let err = models.predict_drag_mean(&o.genome)? - (-c.cd.ln());
        sum += err * err;
        n += 1;
    }
    if n == 0 {
        return Err(SailError::Config("no converged optimum to score against".into()));
    }
    Ok(sum / n as f64)
}

/// Models fit on the observations made within the first `pe` evaluations.
pub fn models_at(
    cfg: &SailConfig,
    bounds: &sail::genome::Bounds,
    obs: &ObservationSet,
    pe: usize,
) -> Result<Surrogates, SailError> {
    let prefix = obs.prefix_by_pe(pe);
    Ok(Surrogates::fit(
        &prefix,
        bounds,
        &cfg.hyper,
        None,
        derive_seed(cfg.seed, "study-fit", pe as u64),
    )?)
}

/// Drag MSE at each checkpoint for one sampler and the seed in `base`.
/// One run to the last checkpoint serves every checkpoint, since a run's
/// first `pe` evaluations do not depend on its budget.
pub fn sampler_mse<D, E>(
    base: &SailConfig,
    sampler: StudySampler,
    checkpoints: &[usize],
    domain: &D,
    evaluator: &E,
    optima: &[Option<CellOptimum>],
) -> Result<Vec<f64>, SailError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    let mut cfg = sampler.configure(base);
    cfg.pe_budget = checkpoints.iter().copied().max().unwrap_or(0);
    cfg.prediction_stats_every = 0;
    cfg.prediction_illumination.iterations = 0;
    let result = run_sail(&cfg, domain, evaluator)?;
    checkpoints
        .iter()
        .map(|&pe| {
            drag_mse(
                &models_at(&cfg, domain.bounds(), &result.observations, pe)?,
                optima,
                evaluator,
            )
        })
        .collect()
}

/// Median of a non-empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    sail::elites::median_sorted(&v).unwrap_or(f64::NAN)
}
