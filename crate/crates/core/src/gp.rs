//! Exact Gaussian-process regression with an ARD squared-exponential kernel.
//!
//! Observations are treated as noise-free: the only diagonal term is a small
//! jitter that keeps the Cholesky factorization well defined. Targets are
//! centered on their mean, so the zero-mean prior applies to deviations from
//! the sample mean, and the mean is added back at prediction time.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::lds::SobolState;
use crate::linalg::{
    cholesky_in_place, dot, residual_compensated, solve_lower_in_place, solve_upper_transposed_in_place,
};

/// Default diagonal jitter, relative to the signal variance.
pub const DEFAULT_RELATIVE_JITTER: f64 = 1e-8;
/// Jitter escalation stops once the jitter exceeds this multiple of the
/// signal variance.
pub const MAX_RELATIVE_JITTER: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training set is empty")]
    NoData,
    #[error("{inputs} inputs but {targets} targets")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(&'static str),
    #[error("non-finite training target at row {0}")]
    NonFiniteTarget(usize),
    #[error("kernel matrix is not positive definite even with jitter {jitter:e}")]
    Conditioning { jitter: f64 },
    #[error("hyperparameter search needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

/// ARD squared-exponential kernel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub jitter: f64,
}

impl KernelParams {
    /// Parameters with the default jitter of `1e-8 · signal_variance`.
    pub fn new(length_scales: Vec<f64>, signal_variance: f64) -> Result<Self, GpError> {
        Self::with_jitter(
            length_scales,
            signal_variance,
            DEFAULT_RELATIVE_JITTER * signal_variance,
        )
    }

    pub fn with_jitter(length_scales: Vec<f64>, signal_variance: f64, jitter: f64) -> Result<Self, GpError> {
        let params = Self {
            length_scales,
            signal_variance,
            jitter,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn isotropic(dim: usize, length_scale: f64, signal_variance: f64) -> Result<Self, GpError> {
        Self::new(vec![length_scale; dim], signal_variance)
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if self.length_scales.is_empty() {
            return Err(GpError::InvalidParams("no length scales"));
        }
        if !self.length_scales.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(GpError::InvalidParams("length scales must be positive"));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(GpError::InvalidParams("signal variance must be positive"));
        }
        if !(self.jitter.is_finite() && self.jitter > 0.0) {
            return Err(GpError::InvalidParams("jitter must be positive"));
        }
        Ok(())
    }
}

/// `σ_f² · exp(−½ Σ_d ((a_d − b_d)/ℓ_d)²)`.
pub fn kernel(a: &[f64], b: &[f64], params: &KernelParams) -> Result<f64, GpError> {
    let dim = params.dim();
    for v in [a, b] {
        if v.len() != dim {
            return Err(GpError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
    }
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&params.length_scales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    Ok(params.signal_variance * (-0.5 * r2).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    /// Predictive variance, clamped to be non-negative.
    pub variance: f64,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// A trained GP: training data, factorized kernel matrix and `K⁻¹ f`.
#[derive(Debug, Clone)]
pub struct GpModel {
    dim: usize,
    rows: usize,
    inputs: Vec<f64>,
    // inputs divided by the length scales, row-major
    scaled: Vec<f64>,
    inv_length_scales: Vec<f64>,
    targets: Vec<f64>,
    target_mean: f64,
    params: KernelParams,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    log_det: f64,
}

struct Factorization {
    chol: Vec<f64>,
    alpha: Vec<f64>,
    log_det: f64,
    jitter: f64,
}

fn scale_rows(inputs: &[f64], inv_ls: &[f64]) -> Vec<f64> {
    let dim = inv_ls.len();
    inputs
        .chunks_exact(dim)
        .flat_map(|row| row.iter().zip(inv_ls).map(|(x, s)| x * s))
        .collect()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn factorize(scaled: &[f64], dim: usize, centered: &[f64], params: &KernelParams) -> Result<Factorization, GpError> {
    let n = centered.len();
    let sf2 = params.signal_variance;
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        let xi = &scaled[i * dim..(i + 1) * dim];
        for j in 0..i {
            let xj = &scaled[j * dim..(j + 1) * dim];
            gram[i * n + j] = sf2 * (-0.5 * sq_dist(xi, xj)).exp();
        }
    }
    let ceiling = MAX_RELATIVE_JITTER * sf2;
    let mut jitter = params.jitter;
    loop {
        let mut chol = gram.clone();
        for i in 0..n {
            chol[i * n + i] = sf2 + jitter;
        }
        if cholesky_in_place(&mut chol, n) {
            let mut alpha = centered.to_vec();
            solve_lower_in_place(&chol, n, &mut alpha);
            solve_upper_transposed_in_place(&chol, n, &mut alpha);
            // one refinement step; near-singular kernels lose digits in alpha
            let mut row = vec![0.0; n];
            let mut delta: Vec<f64> = (0..n)
                .map(|i| {
                    for (j, r) in row.iter_mut().enumerate() {
                        *r = match i.cmp(&j) {
                            std::cmp::Ordering::Equal => sf2 + jitter,
                            std::cmp::Ordering::Greater => gram[i * n + j],
                            std::cmp::Ordering::Less => gram[j * n + i],
                        };
                    }
                    residual_compensated(centered[i], &row, &alpha)
                })
                .collect();
            solve_lower_in_place(&chol, n, &mut delta);
            solve_upper_transposed_in_place(&chol, n, &mut delta);
            alpha.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
            let log_det = 2.0 * (0..n).map(|i| chol[i * n + i].ln()).sum::<f64>();
            return Ok(Factorization {
                chol,
                alpha,
                log_det,
                jitter,
            });
        }
        if jitter >= ceiling {
            return Err(GpError::Conditioning { jitter });
        }
        jitter = (jitter * 10.0).min(ceiling);
    }
}

fn check_training_set(inputs: &[Vec<f64>], targets: &[f64], dim: usize) -> Result<(), GpError> {
    if inputs.is_empty() {
        return Err(GpError::NoData);
    }
    if inputs.len() != targets.len() {
        return Err(GpError::LengthMismatch {
            inputs: inputs.len(),
            targets: targets.len(),
        });
    }
    if let Some(x) = inputs.iter().find(|x| x.len() != dim) {
        return Err(GpError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
        return Err(GpError::NonFiniteTarget(i));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

impl GpModel {
    /// Factorizes `K + jitter·I`, escalating the jitter tenfold on failure
    /// until it exceeds `1e-4 · σ_f²`. The stored params carry the jitter
    /// that was actually used.
    pub fn train(inputs: &[Vec<f64>], targets: &[f64], params: &KernelParams) -> Result<GpModel, GpError> {
        params.validate()?;
        let dim = params.dim();
        check_training_set(inputs, targets, dim)?;
        let flat: Vec<f64> = inputs.iter().flatten().copied().collect();
        let inv_ls: Vec<f64> = params.length_scales.iter().map(|l| 1.0 / l).collect();
        let scaled = scale_rows(&flat, &inv_ls);
        let target_mean = mean(targets);
        let centered: Vec<f64> = targets.iter().map(|t| t - target_mean).collect();
        let fact = factorize(&scaled, dim, &centered, params)?;
        let mut params = params.clone();
        params.jitter = fact.jitter;
        Ok(GpModel {
            dim,
            rows: targets.len(),
            inputs: flat,
            scaled,
            inv_length_scales: inv_ls,
            targets: centered,
            target_mean,
            params,
            chol: fact.chol,
            alpha: fact.alpha,
            log_det: fact.log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    /// Centered training targets.
    pub fn centered_targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    /// Lower-triangular factor, row-major `rows × rows`.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    fn cross_covariance(&self, x: &[f64]) -> Vec<f64> {
        let xs: Vec<f64> = x.iter().zip(&self.inv_length_scales).map(|(v, s)| v * s).collect();
        let sf2 = self.params.signal_variance;
        self.scaled
            .chunks_exact(self.dim)
            .map(|row| sf2 * (-0.5 * sq_dist(row, &xs)).exp())
            .collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), GpError> {
        if x.len() != self.dim {
            return Err(GpError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Predictive mean and variance at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, GpError> {
        let (mean, raw) = self.predict_unclamped(x)?;
        Ok(Prediction {
            mean,
            variance: raw.max(0.0),
        })
    }

    /// Mean and the predictive variance before clamping at zero.
    pub fn predict_unclamped(&self, x: &[f64]) -> Result<(f64, f64), GpError> {
        self.check_dim(x)?;
        let mut k = self.cross_covariance(x);
        let mean = self.target_mean + dot(&k, &self.alpha);
        solve_lower_in_place(&self.chol, self.rows, &mut k);
        let variance = self.params.signal_variance - dot(&k, &k);
        Ok((mean, variance))
    }

    /// Predictive mean only; skips the triangular solve.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64, GpError> {
        self.check_dim(x)?;
        let k = self.cross_covariance(x);
        Ok(self.target_mean + dot(&k, &self.alpha))
    }

    /// `−½ fᵀK⁻¹f − ½ log|K| − (t/2) log 2π` on centered targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        lml(&self.targets, &self.alpha, self.log_det)
    }

    /// Plain-text diagnostic dump: hyperparameters, target mean, row count.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "rows = {}", self.rows);
        let _ = writeln!(out, "target_mean = {}", self.target_mean);
        let _ = writeln!(out, "signal_variance = {}", self.params.signal_variance);
        let _ = writeln!(out, "jitter = {}", self.params.jitter);
        let ls: Vec<String> = self.params.length_scales.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "length_scales = {}", ls.join(" "));
        let _ = writeln!(out, "log_marginal_likelihood = {}", self.log_marginal_likelihood());
        out
    }
}

fn lml(centered: &[f64], alpha: &[f64], log_det: f64) -> f64 {
    let n = centered.len() as f64;
    -0.5 * dot(centered, alpha) - 0.5 * log_det - 0.5 * n * (2.0 * PI).ln()
}

/// Settings for the marginal-likelihood search.
///
/// The search runs in log space over `(ℓ_1..ℓ_d, σ_f²)`. Length-scale bounds
/// are relative to each input's range and signal-variance bounds relative to
/// the target variance.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperSearchConfig {
    pub starts: usize,
    /// Local search sweeps per refined start.
    pub iterations: usize,
    /// How many of the best starting points are locally refined.
    pub refine_starts: usize,
    pub length_scale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    /// Initial pattern step as a fraction of each log-range.
    pub initial_step: f64,
    /// Search stops once every step is below this (natural-log units).
    pub min_step: f64,
    /// Per-input ranges; defaults to the spread of the training inputs.
    pub input_ranges: Option<Vec<f64>>,
    /// Extra starting point, typically the previous fit.
    pub warm_start: Option<KernelParams>,
    /// Fit on an evenly strided subset when the data set is larger.
    pub max_points: Option<usize>,
    pub relative_jitter: f64,
    /// Offsets the Sobol stream of starting points.
    pub seed: u64,
}

impl Default for HyperSearchConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            iterations: 60,
            refine_starts: 8,
            length_scale_bounds: (1e-2, 1e2),
            signal_variance_bounds: (1e-4, 1e2),
            initial_step: 0.125,
            min_step: 1e-3,
            input_ranges: None,
            warm_start: None,
            max_points: None,
            relative_jitter: DEFAULT_RELATIVE_JITTER,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperFit {
    pub params: KernelParams,
    pub log_likelihood: f64,
    /// False when local search never beat the best starting point.
    pub improved: bool,
    pub evaluations: usize,
}

struct LikelihoodSurface<'a> {
    inputs: &'a [f64],
    dim: usize,
    centered: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    relative_jitter: f64,
    evaluations: usize,
}

impl LikelihoodSurface<'_> {
    fn params(&self, theta: &[f64]) -> KernelParams {
        let sf2 = theta[self.dim].exp();
        KernelParams {
            length_scales: theta[..self.dim].iter().map(|t| t.exp()).collect(),
            signal_variance: sf2,
            jitter: self.relative_jitter * sf2,
        }
    }

    fn value(&mut self, theta: &[f64]) -> f64 {
        self.evaluations += 1;
        let params = self.params(theta);
        let inv_ls: Vec<f64> = params.length_scales.iter().map(|l| 1.0 / l).collect();
        let scaled = scale_rows(self.inputs, &inv_ls);
        match factorize(&scaled, self.dim, &self.centered, &params) {
            Ok(f) => {
                let v = lml(&self.centered, &f.alpha, f.log_det);
                if v.is_finite() {
                    v
                } else {
                    f64::NEG_INFINITY
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn pattern_search(&mut self, start: Vec<f64>, start_value: f64, cfg: &HyperSearchConfig) -> (Vec<f64>, f64) {
        let mut theta = start;
        let mut best = start_value;
        let mut steps: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| cfg.initial_step * (h - l))
            .collect();
        for _ in 0..cfg.iterations {
            let mut improved = false;
            for k in 0..theta.len() {
                for dir in [1.0, -1.0] {
                    let moved = (theta[k] + dir * steps[k]).clamp(self.lo[k], self.hi[k]);
                    if moved == theta[k] {
                        continue;
                    }
                    let mut cand = theta.clone();
                    cand[k] = moved;
                    let v = self.value(&cand);
                    if v > best {
                        best = v;
                        theta = cand;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                steps.iter_mut().for_each(|s| *s *= 0.5);
                if steps.iter().all(|s| *s < cfg.min_step) {
                    break;
                }
            }
        }
        (theta, best)
    }
}

fn strided_subset(n: usize, max: Option<usize>) -> Vec<usize> {
    match max {
        Some(m) if m >= 1 && n > m => (0..m).map(|k| k * n / m).collect(),
        _ => (0..n).collect(),
    }
}

/// Maximizes the log marginal likelihood by multi-start pattern search.
///
/// Starting points come from a Sobol grid over the log-space bounds (plus
/// the optional warm start); the best `refine_starts` of them are refined by
/// coordinate-wise pattern search. The result is deterministic for fixed
/// data and config.
pub fn fit_hyperparameters(inputs: &[Vec<f64>], targets: &[f64], cfg: &HyperSearchConfig) -> Result<HyperFit, GpError> {
    const MIN_POINTS: usize = 5;
    let dim = inputs.first().map(|x| x.len()).ok_or(GpError::NoData)?;
    check_training_set(inputs, targets, dim)?;
    if inputs.len() < MIN_POINTS {
        return Err(GpError::TooFewPoints {
            needed: MIN_POINTS,
            got: inputs.len(),
        });
    }
    if cfg.starts == 0 && cfg.warm_start.is_none() {
        return Err(GpError::InvalidParams("no starting points"));
    }

    let subset = strided_subset(inputs.len(), cfg.max_points);
    let flat: Vec<f64> = subset.iter().flat_map(|&i| inputs[i].iter().copied()).collect();
    let sub_targets: Vec<f64> = subset.iter().map(|&i| targets[i]).collect();
    let target_mean = mean(&sub_targets);
    let centered: Vec<f64> = sub_targets.iter().map(|t| t - target_mean).collect();
    let target_var = centered.iter().map(|c| c * c).sum::<f64>() / centered.len() as f64;
    let target_var = if target_var > 0.0 { target_var } else { 1.0 };

    let ranges: Vec<f64> = match &cfg.input_ranges {
        Some(r) if r.len() == dim => r.clone(),
        Some(r) => {
            return Err(GpError::DimensionMismatch {
                expected: dim,
                got: r.len(),
            })
        }
        None => (0..dim)
            .map(|d| {
                let (lo, hi) = inputs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x[d]), hi.max(x[d]))
                });
                if hi > lo {
                    hi - lo
                } else {
                    1.0
                }
            })
            .collect(),
    };
    let mut lo: Vec<f64> = ranges.iter().map(|r| (r * cfg.length_scale_bounds.0).ln()).collect();
    let mut hi: Vec<f64> = ranges.iter().map(|r| (r * cfg.length_scale_bounds.1).ln()).collect();
    lo.push((target_var * cfg.signal_variance_bounds.0).ln());
    hi.push((target_var * cfg.signal_variance_bounds.1).ln());

    let mut surface = LikelihoodSurface {
        inputs: &flat,
        dim,
        centered,
        lo,
        hi,
        relative_jitter: cfg.relative_jitter,
        evaluations: 0,
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(warm) = &cfg.warm_start {
        if warm.dim() == dim && warm.validate().is_ok() {
            let mut theta: Vec<f64> = warm.length_scales.iter().map(|l| l.ln()).collect();
            theta.push(warm.signal_variance.ln());
            for (k, t) in theta.iter_mut().enumerate() {
                *t = t.clamp(surface.lo[k], surface.hi[k]);
            }
            starts.push(theta);
        }
    }
    if cfg.starts > 0 {
        let mut sobol = SobolState::new(dim + 1).map_err(|_| GpError::InvalidParams("too many input dimensions"))?;
        sobol.advance(cfg.seed % (1 << 20));
        for _ in 0..cfg.starts {
            let u = sobol.next_point();
            starts.push(
                u.iter()
                    .enumerate()
                    .map(|(k, &v)| surface.lo[k] + v * (surface.hi[k] - surface.lo[k]))
                    .collect(),
            );
        }
    }

    let mut scored: Vec<(Vec<f64>, f64)> = starts
        .into_iter()
        .map(|theta| {
            let v = surface.value(&theta);
            (theta, v)
        })
        .collect();
    // stable sort keeps the generation order among ties
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let best_start = scored[0].1;
    if !best_start.is_finite() {
        return Err(GpError::Conditioning {
            jitter: MAX_RELATIVE_JITTER * target_var,
        });
    }

    let mut best = scored[0].clone();
    for (theta, value) in scored.into_iter().take(cfg.refine_starts.max(1)) {
        if !value.is_finite() {
            continue;
        }
        let refined = surface.pattern_search(theta, value, cfg);
        if refined.1 > best.1 {
            best = refined;
        }
    }
    Ok(HyperFit {
        params: surface.params(&best.0),
        log_likelihood: best.1,
        improved: best.1 > best_start,
        evaluations: surface.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(dim: usize) -> KernelParams {
        KernelParams::isotropic(dim, 1.0, 1.0).unwrap()
    }

    #[test]
    fn kernel_values() {
        let p = unit(2);
        assert_eq!(kernel(&[0.3, 0.1], &[0.3, 0.1], &p).unwrap(), 1.0);
        assert_relative_eq!(
            kernel(&[0.0, 0.0], &[0.6, 0.8], &p).unwrap(),
            (-0.5f64).exp(),
            epsilon = 1e-15
        );
        let ard = KernelParams::new(vec![1.0, 2.0], 1.0).unwrap();
        assert_relative_eq!(
            kernel(&[0.0, 0.0], &[1.0, 2.0], &ard).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        let scaled = KernelParams::new(vec![1.0], 3.0).unwrap();
        assert_eq!(kernel(&[2.0], &[2.0], &scaled).unwrap(), 3.0);
        assert!(matches!(
            kernel(&[0.0], &[0.0, 1.0], &p),
            Err(GpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_symmetry() {
        let p = KernelParams::new(vec![0.3, 1.7, 0.9], 2.5).unwrap();
        let a = [0.1, -0.4, 2.0];
        let b = [1.1, 0.3, -0.2];
        assert_eq!(kernel(&a, &b, &p).unwrap(), kernel(&b, &a, &p).unwrap());
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(vec![0.0], 1.0).is_err());
        assert!(KernelParams::new(vec![1.0], -1.0).is_err());
        assert!(KernelParams::with_jitter(vec![1.0], 1.0, 0.0).is_err());
        assert!(KernelParams::new(vec![], 1.0).is_err());
    }

    #[test]
    fn single_point_factor() {
        let p = unit(1);
        let m = GpModel::train(&[vec![0.2]], &[4.0], &p).unwrap();
        assert_eq!(m.rows(), 1);
        assert_relative_eq!(m.cholesky_factor()[0], (1.0 + p.jitter).sqrt(), epsilon = 1e-15);
        assert_eq!(m.target_mean(), 4.0);
        assert_eq!(m.centered_targets(), &[0.0]);
    }

    #[test]
    fn two_point_off_diagonal() {
        let p = unit(1);
        let m = GpModel::train(&[vec![0.0], vec![1.0]], &[0.0, 1.0], &p).unwrap();
        let l = m.cholesky_factor();
        // K10 = L10 · L00
        assert_relative_eq!(l[2] * l[0], (-0.5f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn duplicate_inputs_are_handled() {
        let p = unit(1);
        let m = GpModel::train(&[vec![0.5], vec![0.5], vec![0.9]], &[1.0, 1.0, 2.0], &p).unwrap();
        let pred = m.predict(&[0.5]).unwrap();
        assert!((pred.mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_point_likelihood() {
        let p = unit(1);
        let m = GpModel::train(&[vec![0.0]], &[0.0], &p).unwrap();
        let expected = -0.5 * (1.0 + p.jitter).ln() - 0.5 * (2.0 * PI).ln();
        assert_relative_eq!(m.log_marginal_likelihood(), expected, epsilon = 1e-14);
        assert_relative_eq!(m.log_marginal_likelihood(), -0.918_938_533, epsilon = 1e-8);
    }

    #[test]
    fn training_errors() {
        let p = unit(1);
        assert_eq!(GpModel::train(&[], &[], &p).unwrap_err(), GpError::NoData);
        assert!(matches!(
            GpModel::train(&[vec![0.0]], &[1.0, 2.0], &p),
            Err(GpError::LengthMismatch { .. })
        ));
        assert!(matches!(
            GpModel::train(&[vec![0.0, 1.0]], &[1.0], &p),
            Err(GpError::DimensionMismatch { .. })
        ));
        assert_eq!(
            GpModel::train(&[vec![0.0]], &[f64::NAN], &p).unwrap_err(),
            GpError::NonFiniteTarget(0)
        );
        let m = GpModel::train(&[vec![0.0]], &[1.0], &p).unwrap();
        assert!(m.predict(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn dump_lists_hyperparameters() {
        let m = GpModel::train(&[vec![0.0, 0.0], vec![1.0, 0.5]], &[1.0, 3.0], &unit(2)).unwrap();
        let d = m.dump();
        assert!(d.contains("rows = 2"));
        assert!(d.contains("target_mean = 2"));
        assert!(d.contains("length_scales = 1 1"));
    }

    #[test]
    fn hyper_search_needs_points() {
        let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let y = vec![0.0; 4];
        assert!(matches!(
            fit_hyperparameters(&x, &y, &HyperSearchConfig::default()),
            Err(GpError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn strided_subset_is_even() {
        assert_eq!(strided_subset(10, Some(5)), vec![0, 2, 4, 6, 8]);
        assert_eq!(strided_subset(3, Some(5)), vec![0, 1, 2]);
    }
}
