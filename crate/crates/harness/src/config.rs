//! Line-oriented `key = value` run configuration.
//!
//! Keys are dotted (`sail.budget`, `gp.kappa`). Lines starting with `#` are
//! comments. Every key has a default listed in [`KEYS`]; unknown keys are
//! rejected so typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sail::airfoil::{AirfoilDomain, AirfoilGeometry, BaseFoilReference, FlowConditions, TrailingEdge, PARAMETER_NAMES};
use sail::benchmark::MapElitesConfig;
use sail::elites::{FeatureSpec, IlluminationConfig, MutationConfig};
use sail::evaluation::{ExternalConfig, DEFAULT_POLAR_PATTERN};
use sail::genome::Bounds;
use sail::gp::HyperSearchConfig;
use sail::sail::{AcquisitionConfig, AcquisitionKind, SailConfig, Sampler};

use crate::HarnessError;

/// Overrides `evaluator.command` when set.
pub const COMMAND_ENV: &str = "SAIL_EVALUATOR_COMMAND";

pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

const fn key(name: &'static str, default: &'static str, doc: &'static str) -> Key {
    Key { name, default, doc }
}

pub const KEYS: &[Key] = &[
    key("run.seed", "0", "Seed of every random substream."),
    key("flow.aoa", "2.7", "Angle of attack in degrees."),
    key("flow.mach", "0.5", "Mach number."),
    key("flow.reynolds", "1000000", "Reynolds number."),
    key("domain.r_le_up", "0.004 0.014", "Bounds (lower upper) of each PARSEC parameter."),
    key("domain.r_le_lo", "0.004 0.014", ""),
    key("domain.x_up", "0.15 0.65", ""),
    key("domain.z_up", "0.03 0.10", ""),
    key("domain.z_xx_up", "-0.8 -0.2", ""),
    key("domain.x_lo", "0.2 0.5", ""),
    key("domain.z_lo", "-0.09 -0.03", ""),
    key("domain.z_xx_lo", "0.3 1.1", ""),
    key("domain.alpha_te", "-8 0", "Degrees."),
    key("domain.beta_te", "4 16", "Degrees."),
    key(
        "domain.base_genome",
        "0.00853 0.00853 0.431 0.063 -0.432 0.345 -0.058 0.699 -3 10",
        "PARSEC parameters of the base foil (RAE2822-like).",
    ),
    key("domain.te_z", "0", "Fixed trailing-edge height."),
    key("domain.te_thickness", "0", "Fixed trailing-edge thickness."),
    key("domain.surface_points", "151", "Cosine-spaced points per surface."),
    key("domain.max_thickness", "0.3", "Thicker foils are invalid."),
    key(
        "base.file",
        "",
        "File written by eval-base, relative to this config. Ignored when base.area and base.lift are set.",
    ),
    key("base.area", "", "Base foil area."),
    key("base.lift", "", "Base foil lift coefficient under the flow conditions."),
    key("evaluator.kind", "synthetic", "synthetic or external."),
    key(
        "evaluator.command",
        "",
        "External command template with {input} {output} {aoa} {mach} {reynolds}; overridden by SAIL_EVALUATOR_COMMAND.",
    ),
    key("evaluator.workdir", "", "Parent of per-call scratch directories; system temp when empty."),
    key("evaluator.timeout", "30", "Seconds per external call."),
    key("evaluator.pattern", DEFAULT_POLAR_PATTERN, "Result-line regex with cd and cl captures."),
    key("evaluator.concurrency", "1", "Concurrent external processes."),
    key("map.bins", "25", "Partitions per feature (X_up, Z_up)."),
    key("map.mutation_sigma", "0.1", "Gaussian step as a fraction of each parameter range."),
    key("map.mutation_probability", "1.0", "Per-parameter mutation probability."),
    key("map.batch", "32", "Candidates per MAP-Elites batch."),
    key("sail.budget", "1000", "Precise evaluations."),
    key("sail.init", "50", "Initial parameter-space Sobol samples."),
    key("sail.batch", "10", "Samples per iteration."),
    key("sail.inner_budget", "100000", "Candidates per acquisition-map illumination."),
    key("sail.prediction_budget", "100000", "Candidates for the prediction map."),
    key("sail.stats_every", "1", "Prediction map for the stats every N iterations (0 = never)."),
    key("sail.sampler", "acquisition", "acquisition or parameter-sobol."),
    key("gp.acquisition", "ucb", "ucb, mean or variance."),
    key("gp.kappa", "2.0", "UCB confidence multiplier."),
    key("gp.starts", "8", "Sobol starts of the hyperparameter search."),
    key("gp.refine", "8", "Best starts refined by pattern search."),
    key("gp.iterations", "60", "Pattern-search iterations per start."),
    key("gp.max_points", "0", "Fit hyperparameters on at most this many observations (0 = all)."),
    key("gp.refit_every", "1", "Refit hyperparameters every N iterations."),
    key("me.budget", "2000", "Precise evaluations of run-map-elites."),
    key("me.init", "50", "Initial Sobol samples of run-map-elites."),
    key("me.report_every", "100", "Progress row every N precise evaluations."),
    key("study.checkpoints", "100 200 400", "Precise-evaluation checkpoints of sampling-study."),
    key("study.seeds", "0 1 2 3 4", ""),
    key("study.oracle", "", "Per-cell optima fixture from gen-oracle, relative to this config."),
    key("oracle.bins", "10", "Partitions per feature of the oracle grid."),
    key("oracle.samples", "100000", "Uniform random samples per cell."),
    key("oracle.seed", "1", ""),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Directory that relative paths are resolved against.
    root: PathBuf,
}

fn cfg_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: KEYS
                .iter()
                .map(|k| (k.name.to_string(), k.default.to_string()))
                .collect(),
            root: PathBuf::from("."),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| cfg_err(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.root.as_os_str().is_empty() {
            cfg.root = PathBuf::from(".");
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(cfg_err(format!("unknown key `{key}`"))),
        }
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), HarnessError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    /// Applies the evaluator command environment override.
    pub fn apply_env(&mut self) {
        if let Ok(cmd) = std::env::var(COMMAND_ENV) {
            if !cmd.trim().is_empty() {
                self.values.insert("evaluator.command".into(), cmd);
            }
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("undeclared key {key}"))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, HarnessError> {
        let v = self.get(key);
        v.parse().map_err(|_| cfg_err(format!("`{key}`: cannot parse `{v}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, HarnessError> {
        let v: f64 = self.parsed(key)?;
        if !v.is_finite() {
            return Err(cfg_err(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize, HarnessError> {
        self.parsed(key)
    }

    pub fn u64(&self, key: &str) -> Result<u64, HarnessError> {
        self.parsed(key)
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, HarnessError> {
        self.get(key)
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| cfg_err(format!("`{key}`: cannot parse `{s}`"))))
            .collect()
    }

    /// Every key, in key order, with the current values.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn seed(&self) -> Result<u64, HarnessError> {
        self.u64("run.seed")
    }

    pub fn bounds(&self) -> Result<Bounds, HarnessError> {
        let mut lo = Vec::with_capacity(PARAMETER_NAMES.len());
        let mut hi = Vec::with_capacity(PARAMETER_NAMES.len());
        for name in PARAMETER_NAMES {
            let key = format!("domain.{name}");
            let v: Vec<f64> = self.list(&key)?;
            let [a, b] = v[..] else {
                return Err(cfg_err(format!("`{key}` needs two numbers")));
            };
            lo.push(a);
            hi.push(b);
        }
        Bounds::new(lo, hi).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn base_genome(&self) -> Result<Vec<f64>, HarnessError> {
        let g: Vec<f64> = self.list("domain.base_genome")?;
        if g.len() != PARAMETER_NAMES.len() {
            return Err(cfg_err(format!(
                "`domain.base_genome` needs {} numbers",
                PARAMETER_NAMES.len()
            )));
        }
        Ok(g)
    }

    pub fn geometry(&self) -> Result<AirfoilGeometry, HarnessError> {
        let surface_points = self.usize("domain.surface_points")?;
        if surface_points < sail::airfoil::MIN_SURFACE_POINTS {
            return Err(cfg_err(format!(
                "`domain.surface_points` must be at least {}",
                sail::airfoil::MIN_SURFACE_POINTS
            )));
        }
        Ok(AirfoilGeometry {
            trailing_edge: TrailingEdge {
                z: self.f64("domain.te_z")?,
                thickness: self.f64("domain.te_thickness")?,
            },
            surface_points,
            max_thickness: self.f64("domain.max_thickness")?,
        })
    }

    pub fn flow(&self) -> Result<FlowConditions, HarnessError> {
        Ok(FlowConditions {
            angle_of_attack: self.f64("flow.aoa")?,
            mach: self.f64("flow.mach")?,
            reynolds: self.f64("flow.reynolds")?,
        })
    }

    /// The base reference from `base.area`/`base.lift`, or else from
    /// `base.file`.
    pub fn base_reference(&self) -> Result<BaseFoilReference, HarnessError> {
        let (area, lift) = (self.get("base.area"), self.get("base.lift"));
        if !area.is_empty() && !lift.is_empty() {
            return BaseFoilReference::new(self.f64("base.area")?, self.f64("base.lift")?)
                .ok_or_else(|| cfg_err("base.area must be positive and base.lift finite"));
        }
        let file = self.get("base.file");
        if file.is_empty() {
            return Err(cfg_err(
                "no base foil reference: run `sail eval-base` and set base.file",
            ));
        }
        let path = self.resolve(file);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| cfg_err(format!("cannot read base file {}: {e}", path.display())))?;
        let base = Config::parse(&text)?;
        if base.get("base.area").is_empty() || base.get("base.lift").is_empty() {
            return Err(cfg_err(format!("{} lacks base.area or base.lift", path.display())));
        }
        BaseFoilReference::new(base.f64("base.area")?, base.f64("base.lift")?)
            .ok_or_else(|| cfg_err("base.area must be positive and base.lift finite"))
    }

    /// Copies the base reference into `base.area`/`base.lift` so the
    /// snapshot is self-contained.
    pub fn inline_base(&mut self) -> Result<BaseFoilReference, HarnessError> {
        let base = self.base_reference()?;
        self.values.insert("base.area".into(), base.area_base.to_string());
        self.values.insert("base.lift".into(), base.lift_base.to_string());
        self.values.insert("base.file".into(), String::new());
        Ok(base)
    }

    pub fn domain(&self) -> Result<AirfoilDomain, HarnessError> {
        Ok(AirfoilDomain {
            bounds: self.bounds()?,
            geometry: self.geometry()?,
            base: self.base_reference()?,
        })
    }

    pub fn feature_spec(&self, bins_key: &str) -> Result<FeatureSpec, HarnessError> {
        let bins = self.usize(bins_key)?;
        sail::airfoil::feature_spec(&self.bounds()?, bins).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn mutation(&self) -> Result<MutationConfig, HarnessError> {
        let m = MutationConfig {
            sigma: self.f64("map.mutation_sigma")?,
            probability: self.f64("map.mutation_probability")?,
        };
        m.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(m)
    }

    pub fn acquisition(&self) -> Result<AcquisitionConfig, HarnessError> {
        let kind = match self.get("gp.acquisition") {
            "ucb" => AcquisitionKind::Ucb,
            "mean" => AcquisitionKind::MeanOnly,
            "variance" => AcquisitionKind::VarianceOnly,
            other => return Err(cfg_err(format!("unknown acquisition `{other}`"))),
        };
        let a = AcquisitionConfig {
            kind,
            kappa: self.f64("gp.kappa")?,
        };
        a.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(a)
    }

    pub fn hyper(&self) -> Result<HyperSearchConfig, HarnessError> {
        let max_points = self.usize("gp.max_points")?;
        Ok(HyperSearchConfig {
            starts: self.usize("gp.starts")?,
            refine_starts: self.usize("gp.refine")?,
            iterations: self.usize("gp.iterations")?,
            max_points: (max_points > 0).then_some(max_points),
            ..HyperSearchConfig::default()
        })
    }

    pub fn sail(&self) -> Result<SailConfig, HarnessError> {
        let seed = self.seed()?;
        let batch_size = self.usize("map.batch")?;
        let mutation = self.mutation()?;
        let inner = |key: &str| -> Result<IlluminationConfig, HarnessError> {
            Ok(IlluminationConfig {
                iterations: self.usize(key)?,
                batch_size,
                mutation,
                seed,
            })
        };
        let sampler = match self.get("sail.sampler") {
            "acquisition" => Sampler::AcquisitionMap,
            "parameter-sobol" => Sampler::ParameterSobol,
            other => return Err(cfg_err(format!("unknown sampler `{other}`"))),
        };
        let cfg = SailConfig {
            pe_budget: self.usize("sail.budget")?,
            init_count: self.usize("sail.init")?,
            batch_size: self.usize("sail.batch")?,
            features: self.feature_spec("map.bins")?,
            acquisition: self.acquisition()?,
            sampler,
            illumination: inner("sail.inner_budget")?,
            prediction_illumination: inner("sail.prediction_budget")?,
            hyper: self.hyper()?,
            hyper_refit_every: self.usize("gp.refit_every")?,
            prediction_stats_every: self.usize("sail.stats_every")?,
            seed,
        };
        cfg.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn map_elites(&self) -> Result<MapElitesConfig, HarnessError> {
        let cfg = MapElitesConfig {
            pe_budget: self.usize("me.budget")?,
            init_count: self.usize("me.init")?,
            batch_size: self.usize("map.batch")?,
            mutation: self.mutation()?,
            report_every: self.usize("me.report_every")?,
            seed: self.seed()?,
        };
        if cfg.pe_budget == 0 {
            return Err(cfg_err("me.budget must be positive"));
        }
        if cfg.init_count == 0 || cfg.init_count > cfg.pe_budget {
            return Err(cfg_err("me.init must be in 1..=me.budget"));
        }
        Ok(cfg)
    }

    pub fn external(&self) -> Result<ExternalConfig, HarnessError> {
        let command = self.get("evaluator.command");
        if command.trim().is_empty() {
            return Err(cfg_err(format!(
                "evaluator.kind = external needs evaluator.command or {COMMAND_ENV}"
            )));
        }
        let workdir = self.get("evaluator.workdir");
        Ok(ExternalConfig {
            command: command.to_string(),
            working_dir: (!workdir.is_empty()).then(|| self.resolve(workdir)),
            timeout: Duration::from_secs_f64(self.f64("evaluator.timeout")?.max(0.0)),
            polar_pattern: self.get("evaluator.pattern").to_string(),
            max_concurrency: self.usize("evaluator.concurrency")?,
            flow: self.flow()?,
        })
    }
}

/// The commented reference config listing every key with its default.
pub fn reference_config() -> String {
    let mut out = String::from("# Reference configuration. Every key is listed with its default.\n");
    let mut section = "";
    for k in KEYS {
        let s = k.name.split('.').next().unwrap_or_default();
        if s != section {
            let _ = writeln!(out, "\n# {s}");
            section = s;
        }
        if !k.doc.is_empty() {
            let _ = writeln!(out, "# {}", k.doc);
        }
        let _ = writeln!(out, "{} = {}", k.name, k.default);
    }
    out
}
