//! Ground truth and baselines on domains with a cheap precise evaluator.

use rand::Rng as _;

use crate::elites::{
    illuminate_with, map_stats, median_sorted, ElitesError, Evaluation, FeatureMap, FeatureSpec, IlluminationConfig,
    MutationConfig,
};
use crate::evaluation::{Counting, Evaluator, EvaluatorError};
use crate::genome::Bounds;
use crate::lds::SobolState;
use crate::rng::{derive_seed, substream_indexed};
use crate::sail::{precise_fitness, Domain, SailError};

#[derive(Debug, Clone, PartialEq)]
pub struct CellOptimum {
    pub cell: usize,
    pub fitness: f64,
    pub genome: Vec<f64>,
}

/// Bounds of one cell: the feature dimensions restricted to the cell
/// window, every other dimension at its full range. `feature_dims[k]` is the
/// genome position of feature `k`.
pub fn cell_bounds(bounds: &Bounds, spec: &FeatureSpec, feature_dims: &[usize], cell: usize) -> Bounds {
    let window = spec.cell_window(&spec.cell_of(cell));
    let (mut lo, mut hi) = (bounds.lower().to_vec(), bounds.upper().to_vec());
    for (k, &d) in feature_dims.iter().enumerate() {
        lo[d] = window[k].0.max(lo[d]);
        hi[d] = window[k].1.min(hi[d]);
    }
    Bounds::new(lo, hi).expect("cell window inside bounds")
}

/// Best of `samples` uniform random genomes inside one cell, `None` when no
/// sample is feasible. Only for domains whose features are genome values.
pub fn cell_optimum<D, E>(
    domain: &D,
    evaluator: &E,
    spec: &FeatureSpec,
    feature_dims: &[usize],
    cell: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<CellOptimum>, EvaluatorError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    let b = cell_bounds(domain.bounds(), spec, feature_dims, cell);
    let mut rng = substream_indexed(seed, "oracle", cell as u64);
    let mut best: Option<CellOptimum> = None;
    let mut u = vec![0.0; b.dim()];
    for _ in 0..samples {
        u.iter_mut().for_each(|v| *v = rng.random::<f64>());
        let g = b.denormalize(&u);
        if let Some(f) = precise_fitness(domain, evaluator, &g)? {
            if best.as_ref().is_none_or(|o| f > o.fitness) {
                best = Some(CellOptimum {
                    cell,
                    fitness: f,
                    genome: g,
                });
            }
        }
    }
    Ok(best)
}

/// Per-cell optima for every cell of `spec`, computed in parallel.
pub fn cell_optima<D, E>(
    domain: &D,
    evaluator: &E,
    spec: &FeatureSpec,
    feature_dims: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<Option<CellOptimum>>, EvaluatorError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    use rayon::prelude::*;
    (0..spec.total_cells())
        .into_par_iter()
        .map(|cell| cell_optimum(domain, evaluator, spec, feature_dims, cell, samples, seed))
        .collect()
}

/// Fraction of reachable cells (those with an optimum) whose map elite
/// reaches `ratio` of the optimum.
pub fn fraction_reaching(map: &FeatureMap, optima: &[Option<CellOptimum>], ratio: f64) -> f64 {
    let reachable: Vec<&CellOptimum> = optima.iter().flatten().collect();
    if reachable.is_empty() {
        return 0.0;
    }
    let hits = reachable
        .iter()
        .filter(|o| map.get_flat(o.cell).is_some_and(|e| e.value >= ratio * o.fitness))
        .count();
    hits as f64 / reachable.len() as f64
}

/// True fitness of each elite, re-evaluated with the precise evaluator.
/// Infeasible elites count as empty.
pub fn true_fitness_map<D, E>(domain: &D, evaluator: &E, map: &FeatureMap) -> Result<Vec<Option<f64>>, EvaluatorError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    let mut out = vec![None; map.spec().total_cells()];
    for (cell, elite) in map.elites() {
        out[cell] = precise_fitness(domain, evaluator, &elite.genome)?;
    }
    Ok(out)
}

/// Median true fitness over the reachable cells, empty cells counting 0.
pub fn true_fitness_median(true_map: &[Option<f64>], optima: &[Option<CellOptimum>]) -> f64 {
    let mut v: Vec<f64> = optima
        .iter()
        .flatten()
        .map(|o| true_map[o.cell].unwrap_or(0.0).max(0.0))
        .collect();
    v.sort_by(f64::total_cmp);
    median_sorted(&v).unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapElitesConfig {
    pub pe_budget: usize,
    pub init_count: usize,
    pub batch_size: usize,
    pub mutation: MutationConfig,
    /// Report coverage and value sum every this many precise evaluations.
    pub report_every: usize,
    pub seed: u64,
}

impl Default for MapElitesConfig {
    fn default() -> Self {
        Self {
            pe_budget: 5000,
            init_count: 50,
            batch_size: 32,
            mutation: MutationConfig::default(),
            report_every: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapElitesReport {
    pub pe_used: usize,
    pub coverage: f64,
    pub value_sum: f64,
}

#[derive(Debug, Clone)]
pub struct MapElitesRun {
    pub map: FeatureMap,
    pub reports: Vec<MapElitesReport>,
    pub pe_used: usize,
}

/// MAP-Elites on the precise evaluator. Seeds are the first `init_count`
/// valid-geometry parameter-space Sobol points; each candidate with valid
/// geometry costs one precise evaluation, invalid ones are free.
pub fn run_map_elites<D, E>(
    domain: &D,
    evaluator: &E,
    spec: &FeatureSpec,
    cfg: &MapElitesConfig,
) -> Result<MapElitesRun, SailError>
where
    D: Domain + ?Sized,
    E: Evaluator + ?Sized,
{
    if cfg.pe_budget == 0 || cfg.init_count == 0 || cfg.init_count > cfg.pe_budget {
        return Err(SailError::Config(format!(
            "need 0 < init_count <= pe_budget, got {} and {}",
            cfg.init_count, cfg.pe_budget
        )));
    }
    let counted = Counting::new(evaluator);
    let failure = std::sync::Mutex::new(None);
    let objective = |g: &[f64]| match precise_fitness(domain, &counted, g) {
        Ok(v) => v.map(|value| Evaluation {
            value,
            features: domain.features(g),
        }),
        Err(e) => {
            failure.lock().expect("failure slot").get_or_insert(e);
            None
        }
    };

    let mut sobol = SobolState::new(domain.bounds().dim()).map_err(|e| SailError::Config(e.to_string()))?;
    sobol.advance(derive_seed(cfg.seed, "parameter-sobol", 0) % 4096);
    let mut seeds = Vec::with_capacity(cfg.init_count);
    let mut draws = 0;
    while seeds.len() < cfg.init_count {
        if draws == 1000 * cfg.init_count {
            return Err(SailError::Initialization {
                needed: cfg.init_count,
                found: seeds.len(),
                draws,
            });
        }
        draws += 1;
        let g = domain.bounds().denormalize(&sobol.next_point());
        if domain.area(&g).is_some() {
            seeds.push(g);
        }
    }

    // enough candidates that the budget binds; stopped by the callback
    let illumination = IlluminationConfig {
        iterations: usize::MAX,
        batch_size: cfg.batch_size,
        mutation: cfg.mutation,
        seed: derive_seed(cfg.seed, "map-elites", 0),
    };
    let mut reports = Vec::new();
    let mut next_report = cfg.report_every;
    let map = illuminate_until(
        domain,
        &objective,
        &counted,
        &seeds,
        spec,
        &illumination,
        cfg,
        |map, pe| {
            while cfg.report_every > 0 && pe >= next_report {
                let s = map_stats(map);
                reports.push(MapElitesReport {
                    pe_used: pe,
                    coverage: s.coverage,
                    value_sum: s.value_sum,
                });
                next_report += cfg.report_every;
            }
        },
    )?;
    if let Some(e) = failure.into_inner().expect("failure slot") {
        return Err(e.into());
    }
    Ok(MapElitesRun {
        map,
        reports,
        pe_used: counted.calls() as usize,
    })
}

/// Batches are shrunk before each report point and near the end, so reports
/// and the budget land on exact PE counts.
#[allow(clippy::too_many_arguments)]
fn illuminate_until<D, O, E, F>(
    domain: &D,
    objective: &O,
    counted: &Counting<E>,
    seeds: &[Vec<f64>],
    spec: &FeatureSpec,
    illumination: &IlluminationConfig,
    cfg: &MapElitesConfig,
    mut report: F,
) -> Result<FeatureMap, ElitesError>
where
    D: Domain + ?Sized,
    O: crate::elites::Objective + ?Sized,
    E: Evaluator,
    F: FnMut(&FeatureMap, usize),
{
    let mut map = FeatureMap::new(spec.clone());
    let mut seeded = false;
    loop {
        let remaining = cfg.pe_budget - counted.calls() as usize;
        if seeded && remaining == 0 {
            break;
        }
        let calls = counted.calls() as usize;
        let to_report = match cfg.report_every {
            0 => usize::MAX,
            every => every - calls % every,
        };
        let step = IlluminationConfig {
            iterations: if seeded {
                remaining.min(cfg.batch_size).min(to_report)
            } else {
                0
            },
            seed: derive_seed(illumination.seed, "batch", counted.calls()),
            ..illumination.clone()
        };
        let start = if seeded { &[][..] } else { seeds };
        map = illuminate_with(objective, domain.bounds(), map, start, &step, |_, _| {})?;
        seeded = true;
        report(&map, counted.calls() as usize);
    }
    Ok(map)
}
