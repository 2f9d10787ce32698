//! Grid archive and the MAP-Elites illumination loop.
//!
//! The archive keeps at most one elite per cell of an N-dimensional feature
//! grid. A candidate displaces the incumbent only with a strictly greater
//! value, so per-cell values never decrease.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::genome::Bounds;
use crate::rng::substream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElitesError {
    #[error("feature axis {axis}: {reason}")]
    InvalidAxis { axis: usize, reason: &'static str },
    #[error("feature vector has {got} dimensions, map has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite feature value in dimension {0}")]
    NonFiniteFeature(usize),
    #[error("non-finite objective value")]
    NonFiniteValue,
    #[error("no seed genome produced a valid evaluation")]
    NoValidSeeds,
    #[error("invalid mutation settings: {0}")]
    InvalidMutation(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

impl FeatureAxis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, bins: usize) -> Self {
        Self {
            name: name.into(),
            min,
            max,
            bins,
        }
    }

    fn width(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }
}

/// Feature-space bounds and resolution. Cells are stored row-major with the
/// first axis varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    axes: Vec<FeatureAxis>,
}

impl FeatureSpec {
    pub fn new(axes: Vec<FeatureAxis>) -> Result<Self, ElitesError> {
        if axes.is_empty() {
            return Err(ElitesError::InvalidAxis {
                axis: 0,
                reason: "at least one axis is required",
            });
        }
        for (axis, a) in axes.iter().enumerate() {
            if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
                return Err(ElitesError::InvalidAxis {
                    axis,
                    reason: "bounds must be finite with min < max",
                });
            }
            if a.bins == 0 {
                return Err(ElitesError::InvalidAxis {
                    axis,
                    reason: "bins must be positive",
                });
            }
        }
        Ok(Self { axes })
    }

    /// Square grid helper: every axis gets the same number of bins.
    pub fn uniform(ranges: &[(&str, f64, f64)], bins: usize) -> Result<Self, ElitesError> {
        Self::new(
            ranges
                .iter()
                .map(|&(name, min, max)| FeatureAxis::new(name, min, max, bins))
                .collect(),
        )
    }

    pub fn axes(&self) -> &[FeatureAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn total_cells(&self) -> usize {
        self.axes.iter().map(|a| a.bins).product()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.bins).collect()
    }

    /// Cell coordinates of a feature vector. Values outside the bounds go to
    /// the edge bins; the upper bound itself belongs to the last bin.
    pub fn niche(&self, features: &[f64]) -> Result<Vec<usize>, ElitesError> {
        if features.len() != self.dim() {
            return Err(ElitesError::DimensionMismatch {
                expected: self.dim(),
                got: features.len(),
            });
        }
        features
            .iter()
            .zip(&self.axes)
            .enumerate()
            .map(|(d, (&f, a))| {
                if !f.is_finite() {
                    return Err(ElitesError::NonFiniteFeature(d));
                }
                let pos = ((f - a.min) / (a.max - a.min) * a.bins as f64).floor();
                Ok(pos.clamp(0.0, (a.bins - 1) as f64) as usize)
            })
            .collect()
    }

    pub fn flat_index(&self, cell: &[usize]) -> usize {
        cell.iter().zip(&self.axes).fold(0, |acc, (&c, a)| acc * a.bins + c)
    }

    pub fn cell_of(&self, mut flat: usize) -> Vec<usize> {
        let mut cell = vec![0; self.dim()];
        for (d, a) in self.axes.iter().enumerate().rev() {
            cell[d] = flat % a.bins;
            flat /= a.bins;
        }
        cell
    }

    /// `(lower, upper)` feature bounds of a cell per axis.
    pub fn cell_window(&self, cell: &[usize]) -> Vec<(f64, f64)> {
        cell.iter()
            .zip(&self.axes)
            .map(|(&c, a)| {
                let w = a.width();
                (a.min + c as f64 * w, a.min + (c + 1) as f64 * w)
            })
            .collect()
    }

    pub fn cell_center(&self, cell: &[usize]) -> Vec<f64> {
        self.cell_window(cell)
            .into_iter()
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Feature vector for unit-cube coordinates `u`.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.axes)
            .map(|(v, a)| a.min + v * (a.max - a.min))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub genome: Vec<f64>,
    pub value: f64,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    InsertedNew,
    Replaced,
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    spec: FeatureSpec,
    cells: Vec<Option<Elite>>,
    // flat indices of occupied cells in order of first occupation
    occupied: Vec<usize>,
}

impl FeatureMap {
    pub fn new(spec: FeatureSpec) -> Self {
        let n = spec.total_cells();
        Self {
            spec,
            cells: vec![None; n],
            occupied: Vec::new(),
        }
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn get(&self, cell: &[usize]) -> Option<&Elite> {
        self.cells[self.spec.flat_index(cell)].as_ref()
    }

    pub fn get_flat(&self, flat: usize) -> Option<&Elite> {
        self.cells[flat].as_ref()
    }

    pub fn filled(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    /// Occupied cells in flat-index order.
    pub fn elites(&self) -> impl Iterator<Item = (usize, &Elite)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|e| (i, e)))
    }

    /// Elite competition for the niche of `features`.
    pub fn try_insert(
        &mut self,
        genome: Vec<f64>,
        features: Vec<f64>,
        value: f64,
    ) -> Result<InsertOutcome, ElitesError> {
        if !value.is_finite() {
            return Err(ElitesError::NonFiniteValue);
        }
        let cell = self.spec.niche(&features)?;
        let flat = self.spec.flat_index(&cell);
        let slot = &mut self.cells[flat];
        let outcome = match slot {
            None => {
                self.occupied.push(flat);
                InsertOutcome::InsertedNew
            }
            Some(incumbent) if incumbent.value < value => InsertOutcome::Replaced,
            Some(_) => return Ok(InsertOutcome::Rejected),
        };
        *slot = Some(Elite {
            genome,
            value,
            features,
        });
        Ok(outcome)
    }

    /// Places an elite directly, bypassing competition. Used when loading
    /// maps from disk.
    pub fn set_cell(&mut self, flat: usize, elite: Elite) {
        if self.cells[flat].is_none() {
            self.occupied.push(flat);
        }
        self.cells[flat] = Some(elite);
    }

    fn occupied_in_order(&self) -> &[usize] {
        &self.occupied
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapStats {
    pub coverage: f64,
    pub filled: usize,
    pub value_sum: f64,
    /// `None` for an empty map.
    pub value_median: Option<f64>,
}

pub fn map_stats(map: &FeatureMap) -> MapStats {
    let mut values: Vec<f64> = map.elites().map(|(_, e)| e.value).collect();
    let filled = values.len();
    values.sort_by(f64::total_cmp);
    MapStats {
        coverage: filled as f64 / map.spec().total_cells() as f64,
        filled,
        value_sum: values.iter().sum(),
        value_median: median_sorted(&values),
    }
}

pub fn median_sorted(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

/// Isotropic Gaussian variation with clipping to the genome bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationConfig {
    /// Step size as a fraction of each parameter's range.
    pub sigma: f64,
    /// Chance that any one parameter is perturbed.
    pub probability: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            probability: 1.0,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), ElitesError> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(ElitesError::InvalidMutation("sigma must be positive"));
        }
        if !(self.probability > 0.0 && self.probability <= 1.0) {
            return Err(ElitesError::InvalidMutation("probability must be in (0, 1]"));
        }
        Ok(())
    }

    pub fn mutate<R: Rng + ?Sized>(&self, parent: &[f64], bounds: &Bounds, rng: &mut R) -> Vec<f64> {
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let mut child: Vec<f64> = parent
            .iter()
            .enumerate()
            .map(|(d, &x)| {
                if self.probability >= 1.0 || rng.random::<f64>() < self.probability {
                    x + self.sigma * bounds.range(d) * unit.sample(rng)
                } else {
                    x
                }
            })
            .collect();
        bounds.clip(&mut child);
        child
    }
}

/// Objective value and feature descriptor of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub features: Vec<f64>,
}

/// The evaluation channel used by [`illuminate`]. `None` marks an infeasible
/// candidate, which is discarded.
pub trait Objective: Sync {
    fn evaluate(&self, genome: &[f64]) -> Option<Evaluation>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> Option<Evaluation> + Sync,
{
    fn evaluate(&self, genome: &[f64]) -> Option<Evaluation> {
        self(genome)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationConfig {
    /// Number of mutated candidates generated after seeding.
    pub iterations: usize,
    pub batch_size: usize,
    pub mutation: MutationConfig,
    pub seed: u64,
}

impl Default for IlluminationConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            batch_size: 32,
            mutation: MutationConfig::default(),
            seed: 0,
        }
    }
}

/// Counters reported after each batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Progress {
    /// Objective calls so far, seeds included.
    pub evaluations: usize,
    pub generated: usize,
}

fn insert_evaluated(map: &mut FeatureMap, genome: Vec<f64>, eval: Option<Evaluation>) {
    if let Some(e) = eval {
        // non-finite values and features are discarded like infeasible ones
        let _ = map.try_insert(genome, e.features, e.value);
    }
}

/// Runs MAP-Elites from `seeds`.
pub fn illuminate<O: Objective + ?Sized>(
    objective: &O,
    bounds: &Bounds,
    spec: &FeatureSpec,
    seeds: &[Vec<f64>],
    cfg: &IlluminationConfig,
) -> Result<FeatureMap, ElitesError> {
    illuminate_with(objective, bounds, FeatureMap::new(spec.clone()), seeds, cfg, |_, _| {})
}

/// [`illuminate`] starting from an existing map, calling `on_batch` after
/// the seeds and after every batch. Candidates of a batch are evaluated in
/// parallel and inserted serially in generation order.
pub fn illuminate_with<O, F>(
    objective: &O,
    bounds: &Bounds,
    mut map: FeatureMap,
    seeds: &[Vec<f64>],
    cfg: &IlluminationConfig,
    mut on_batch: F,
) -> Result<FeatureMap, ElitesError>
where
    O: Objective + ?Sized,
    F: FnMut(&FeatureMap, Progress),
{
    cfg.mutation.validate()?;
    let mut progress = Progress::default();
    let seed_evals: Vec<Option<Evaluation>> = seeds.par_iter().map(|g| objective.evaluate(g)).collect();
    progress.evaluations += seeds.len();
    for (g, e) in seeds.iter().zip(seed_evals) {
        insert_evaluated(&mut map, g.clone(), e);
    }
    if map.is_empty() {
        return Err(ElitesError::NoValidSeeds);
    }
    on_batch(&map, progress);

    let mut rng = substream(cfg.seed, "mutation");
    let batch_size = cfg.batch_size.max(1);
    while progress.generated < cfg.iterations {
        let n = batch_size.min(cfg.iterations - progress.generated);
        let parents = map.occupied_in_order();
        let children: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let flat = parents[rng.random_range(0..parents.len())];
                let parent = &map.cells[flat].as_ref().expect("occupied cell").genome;
                cfg.mutation.mutate(parent, bounds, &mut rng)
            })
            .collect();
        let evals: Vec<Option<Evaluation>> = children.par_iter().map(|g| objective.evaluate(g)).collect();
        for (g, e) in children.into_iter().zip(evals) {
            insert_evaluated(&mut map, g, e);
        }
        progress.generated += n;
        progress.evaluations += n;
        on_batch(&map, progress);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(bins: usize) -> FeatureSpec {
        FeatureSpec::uniform(&[("a", 0.0, 1.0), ("b", 0.0, 1.0)], bins).unwrap()
    }

    #[test]
    fn niche_edges() {
        let s = grid(25);
        assert_eq!(s.niche(&[0.0, 0.0]).unwrap(), vec![0, 0]);
        assert_eq!(s.niche(&[1.0, 1.0]).unwrap(), vec![24, 24]);
        assert_eq!(s.niche(&[0.5, 0.5]).unwrap(), vec![12, 12]);
        assert_eq!(s.niche(&[-3.0, 7.0]).unwrap(), vec![0, 24]);
        assert_eq!(s.niche(&[f64::NAN, 0.2]).unwrap_err(), ElitesError::NonFiniteFeature(0));
        assert!(s.niche(&[0.1]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(FeatureSpec::uniform(&[("a", 1.0, 1.0)], 5).is_err());
        assert!(FeatureSpec::uniform(&[("a", 0.0, 1.0)], 0).is_err());
        assert!(FeatureSpec::new(vec![]).is_err());
        let s = FeatureSpec::new(vec![
            FeatureAxis::new("x", 0.0, 2.0, 4),
            FeatureAxis::new("y", -1.0, 1.0, 3),
        ])
        .unwrap();
        assert_eq!(s.total_cells(), 12);
        let flat = s.flat_index(&[2, 1]);
        assert_eq!(flat, 7);
        assert_eq!(s.cell_of(flat), vec![2, 1]);
        let w = s.cell_window(&[2, 1]);
        assert_eq!(w[0], (1.0, 1.5));
        assert!((w[1].0 + 1.0 / 3.0).abs() < 1e-15 && (w[1].1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn insertion_rules() {
        let mut m = FeatureMap::new(grid(5));
        let f = vec![0.5, 0.5];
        assert_eq!(
            m.try_insert(vec![0.0], f.clone(), 1.0).unwrap(),
            InsertOutcome::InsertedNew
        );
        assert_eq!(
            m.try_insert(vec![1.0], f.clone(), 1.0).unwrap(),
            InsertOutcome::Rejected
        );
        assert_eq!(m.get(&[2, 2]).unwrap().genome, vec![0.0]);
        assert_eq!(
            m.try_insert(vec![2.0], f.clone(), 2.0).unwrap(),
            InsertOutcome::Replaced
        );
        assert_eq!(
            m.try_insert(vec![3.0], f.clone(), 0.5).unwrap(),
            InsertOutcome::Rejected
        );
        assert_eq!(m.get(&[2, 2]).unwrap().value, 2.0);
        assert_eq!(
            m.try_insert(vec![3.0], f, f64::INFINITY),
            Err(ElitesError::NonFiniteValue)
        );
        assert_eq!(m.filled(), 1);
    }

    #[test]
    fn stats() {
        let mut m = FeatureMap::new(grid(5));
        let s = map_stats(&m);
        assert_eq!((s.coverage, s.value_sum, s.value_median), (0.0, 0.0, None));
        m.try_insert(vec![], vec![0.1, 0.1], 3.0).unwrap();
        let s = map_stats(&m);
        assert_eq!((s.coverage, s.value_sum, s.value_median), (1.0 / 25.0, 3.0, Some(3.0)));
        m.try_insert(vec![], vec![0.9, 0.1], 1.0).unwrap();
        assert_eq!(map_stats(&m).value_median, Some(2.0));
    }

    #[test]
    fn zero_iterations_places_seeds_only() {
        let s = grid(5);
        let b = Bounds::unit(2);
        let obj = |g: &[f64]| {
            (g[0] < 0.9).then(|| Evaluation {
                value: g[0] + g[1],
                features: g.to_vec(),
            })
        };
        let seeds = vec![vec![0.1, 0.1], vec![0.15, 0.12], vec![0.95, 0.5], vec![0.5, 0.5]];
        let cfg = IlluminationConfig {
            iterations: 0,
            ..Default::default()
        };
        let m = illuminate(&obj, &b, &s, &seeds, &cfg).unwrap();
        assert_eq!(m.filled(), 2);
        assert_eq!(m.get(&[0, 0]).unwrap().genome, vec![0.15, 0.12]);
        assert_eq!(m.get(&[2, 2]).unwrap().value, 1.0);
    }

    #[test]
    fn invalid_seeds_fail() {
        let obj = |_: &[f64]| None;
        let err = illuminate(
            &obj,
            &Bounds::unit(2),
            &grid(3),
            &[vec![0.5, 0.5]],
            &IlluminationConfig::default(),
        );
        assert_eq!(err.unwrap_err(), ElitesError::NoValidSeeds);
    }

    #[test]
    fn mutation_stays_in_bounds() {
        let b = Bounds::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mut rng = substream(3, "test");
        let m = MutationConfig {
            sigma: 2.0,
            probability: 1.0,
        };
        for _ in 0..200 {
            let c = m.mutate(&[0.5, 0.0], &b, &mut rng);
            assert!(b.contains(&c));
        }
        assert!(MutationConfig {
            sigma: 0.0,
            probability: 1.0
        }
        .validate()
        .is_err());
        assert!(MutationConfig {
            sigma: 0.1,
            probability: 0.0
        }
        .validate()
        .is_err());
    }
}
