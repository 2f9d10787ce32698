//! The CLI commands. Each writes its outputs and returns a short summary
//! for the terminal.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sail::airfoil::{PARAMETER_NAMES, X_UP, Z_UP};
use sail::benchmark::{cell_optima, run_map_elites};
use sail::elites::map_stats;
use sail::evaluation::evaluate_base;
use sail::rng::derive_seed;
use sail::sail::run_sail;

use crate::config::Config;
use crate::io;
use crate::study::{median, sampler_mse, StudySampler};
use crate::{AnyEvaluator, HarnessError};

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))
}

/// Short identifier of a configuration snapshot.
fn run_id(snapshot: &str) -> String {
    format!("{:016x}", derive_seed(0, snapshot, 0))
}

/// Writes `config.cfg` into `dir` with the base reference inlined.
fn snapshot(cfg: &mut Config, dir: &Path) -> Result<String, HarnessError> {
    cfg.inline_base()?;
    let snap = cfg.snapshot();
    create_dir(dir)?;
    io::write_text(&dir.join("config.cfg"), &snap)?;
    Ok(snap)
}

pub fn run_sail_cmd(mut cfg: Config, out: &Path) -> Result<String, HarnessError> {
    let sail_cfg = cfg.sail()?;
    let domain = cfg.domain()?;
    let evaluator = AnyEvaluator::from_config(&cfg, &domain.geometry)?;
    let snap = snapshot(&mut cfg, out)?;
    let start = Instant::now();
    let result = run_sail(&sail_cfg, &domain, &evaluator)?;
    let wall = start.elapsed().as_secs_f64();

    io::write_observations(&out.join("observations.csv"), &result.observations, &PARAMETER_NAMES)?;
    io::write_stats(&out.join("stats.csv"), &result.stats)?;
    io::write_map(
        &out.join("prediction_map.csv"),
        &result.prediction_map,
        &PARAMETER_NAMES,
    )?;
    io::write_pgm(&out.join("prediction_map.pgm"), &result.prediction_map)?;
    let models = format!(
        "[drag]\n{}\n[lift]\n{}",
        result.models.drag.dump(),
        result.models.lift.dump()
    );
    io::write_text(&out.join("models.txt"), &models)?;

    let s = map_stats(&result.prediction_map);
    let mut summary = String::new();
    let _ = writeln!(summary, "run_id = {}", run_id(&snap));
    let _ = writeln!(summary, "pe_used = {}", result.pe_used);
    let _ = writeln!(summary, "observations = {}", result.observations.len());
    let _ = writeln!(summary, "iterations = {}", result.iterations);
    let _ = writeln!(summary, "starved = {}", result.starved);
    let _ = writeln!(summary, "prediction_coverage = {}", s.coverage);
    let _ = writeln!(summary, "prediction_value_sum = {}", s.value_sum);
    if let Some(m) = s.value_median {
        let _ = writeln!(summary, "prediction_value_median = {m}");
    }
    let _ = writeln!(summary, "wall_seconds = {wall:.3}");
    io::write_text(&out.join("summary.txt"), &summary)?;
    Ok(summary)
}

pub fn run_map_elites_cmd(mut cfg: Config, out: &Path) -> Result<String, HarnessError> {
    let me_cfg = cfg.map_elites()?;
    let domain = cfg.domain()?;
    let spec = cfg.feature_spec("map.bins")?;
    let evaluator = AnyEvaluator::from_config(&cfg, &domain.geometry)?;
    let snap = snapshot(&mut cfg, out)?;
    let start = Instant::now();
    let run = run_map_elites(&domain, &evaluator, &spec, &me_cfg)?;
    let wall = start.elapsed().as_secs_f64();

    io::write_progress(&out.join("progress.csv"), &run.reports)?;
    io::write_map(&out.join("map.csv"), &run.map, &PARAMETER_NAMES)?;
    io::write_pgm(&out.join("map.pgm"), &run.map)?;
    let s = map_stats(&run.map);
    let mut summary = String::new();
    let _ = writeln!(summary, "run_id = {}", run_id(&snap));
    let _ = writeln!(summary, "pe_used = {}", run.pe_used);
    let _ = writeln!(summary, "coverage = {}", s.coverage);
    let _ = writeln!(summary, "value_sum = {}", s.value_sum);
    if let Some(m) = s.value_median {
        let _ = writeln!(summary, "value_median = {m}");
    }
    let _ = writeln!(summary, "wall_seconds = {wall:.3}");
    io::write_text(&out.join("summary.txt"), &summary)?;
    Ok(summary)
}

pub fn oracle_path(cfg: &Config, explicit: Option<&Path>) -> Result<PathBuf, HarnessError> {
    match explicit {
        Some(p) => Ok(p.to_path_buf()),
        None if !cfg.get("study.oracle").is_empty() => Ok(cfg.resolve(cfg.get("study.oracle"))),
        None => Err(HarnessError::Config(
            "no oracle path: set study.oracle or pass --oracle".into(),
        )),
    }
}

pub fn gen_oracle_cmd(cfg: Config, output: &Path) -> Result<String, HarnessError> {
    let domain = cfg.domain()?;
    let spec = cfg.feature_spec("oracle.bins")?;
    let evaluator = AnyEvaluator::from_config(&cfg, &domain.geometry)?;
    let samples = cfg.usize("oracle.samples")?;
    if samples == 0 {
        return Err(HarnessError::Config("oracle.samples must be positive".into()));
    }
    let optima = cell_optima(
        &domain,
        &evaluator,
        &spec,
        &[X_UP, Z_UP],
        samples,
        cfg.u64("oracle.seed")?,
    )?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    io::write_optima(output, &spec, &optima, &PARAMETER_NAMES)?;
    let reachable = optima.iter().flatten().count();
    Ok(format!("{reachable} of {} cells reachable\n", optima.len()))
}

pub fn sampling_study_cmd(mut cfg: Config, oracle: &Path, output: &Path) -> Result<String, HarnessError> {
    if !oracle.exists() {
        return Err(HarnessError::Config(format!(
            "optima fixture {} not found; run `sail gen-oracle` first",
            oracle.display()
        )));
    }
    let domain = cfg.domain()?;
    let evaluator = AnyEvaluator::from_config(&cfg, &domain.geometry)?;
    let optima = io::read_optima(oracle, &cfg.feature_spec("oracle.bins")?, PARAMETER_NAMES.len())?;
    let checkpoints: Vec<usize> = cfg.list("study.checkpoints")?;
    let seeds: Vec<u64> = cfg.list("study.seeds")?;
    if checkpoints.is_empty() || checkpoints.contains(&0) || seeds.is_empty() {
        return Err(HarnessError::Config(
            "study needs positive checkpoints and at least one seed".into(),
        ));
    }
    cfg.inline_base()?;

    let mut lines = vec![{
        let mut h = vec!["sampler".to_string(), "seed".to_string()];
        h.extend(checkpoints.iter().map(|c| format!("pe_{c}")));
        h
    }];
    let mut summary = String::new();
    for sampler in StudySampler::ALL {
        let mut per_seed = Vec::new();
        for &seed in &seeds {
            let mut c = cfg.clone();
            c.set("run.seed", &seed.to_string())?;
            let mse = sampler_mse(&c.sail()?, sampler, &checkpoints, &domain, &evaluator, &optima)?;
            let mut row = vec![sampler.name().to_string(), seed.to_string()];
            row.extend(mse.iter().map(f64::to_string));
            lines.push(row);
            per_seed.push(mse);
        }
        let medians: Vec<f64> = (0..checkpoints.len())
            .map(|k| median(&per_seed.iter().map(|m| m[k]).collect::<Vec<_>>()))
            .collect();
        let mut row = vec![sampler.name().to_string(), "median".to_string()];
        row.extend(medians.iter().map(f64::to_string));
        lines.push(row);
        let _ = writeln!(
            summary,
            "{:<16} final median MSE {}",
            sampler.name(),
            medians[medians.len() - 1]
        );
    }
    let mut w = csv::Writer::from_path(output).map_err(|e| HarnessError::Io(format!("{}: {e}", output.display())))?;
    for l in &lines {
        w.write_record(l).map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Pgm,
}

pub fn export_map_cmd(input: &Path, format: ExportFormat, output: &Path) -> Result<String, HarnessError> {
    let table = io::read_map(input)?;
    match format {
        ExportFormat::Csv => io::write_map(output, &table.map, &table.param_names)?,
        ExportFormat::Pgm => io::write_pgm(output, &table.map)?,
    }
    let shape = table.map.spec().shape();
    Ok(format!(
        "{} cells ({shape:?}), {} filled\n",
        table.map.spec().total_cells(),
        table.map.filled()
    ))
}

pub fn eval_base_cmd(cfg: Config, output: &Path) -> Result<String, HarnessError> {
    let geometry = cfg.geometry()?;
    let genome = cfg.base_genome()?;
    let evaluator = AnyEvaluator::from_config(&cfg, &geometry)?;
    let base = evaluate_base(&evaluator, &geometry, &genome).map_err(|e| match e {
        sail::evaluation::BaseError::Evaluator(e) => HarnessError::from(e),
        other => HarnessError::Run(other.to_string()),
    })?;
    let text = format!(
        "# base foil reference for evaluator.kind = {}\nbase.area = {}\nbase.lift = {}\n",
        cfg.get("evaluator.kind"),
        base.area_base,
        base.lift_base
    );
    io::write_text(output, &text)?;
    Ok(text)
}
