use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sail_harness::commands::{self, ExportFormat};
use sail_harness::config::Config;
use sail_harness::HarnessError;

/// Surrogate-assisted illumination experiments.
#[derive(Parser)]
#[command(name = "sail", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set gp.kappa=1.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set run.seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run SAIL and write a run directory.
    RunSail {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Precise-evaluation budget (sail.budget).
        #[arg(long)]
        budget: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run MAP-Elites on the precise evaluator.
    RunMapElites {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Precise-evaluation budget (me.budget).
        #[arg(long)]
        budget: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare drag-model accuracy of the four sampling rules.
    SamplingStudy {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Per-cell optima from gen-oracle; defaults to study.oracle.
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Re-export a map CSV as CSV or PGM.
    ExportMap {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "pgm")]
        format: Format,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Brute-force the per-cell optima fixture.
    GenOracle {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Defaults to study.oracle.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the base foil and write its area and lift.
    EvalBase {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

fn load(args: &ConfigArgs, budget: Option<(&str, usize)>) -> Result<Config, HarnessError> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_env();
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = args.seed {
        cfg.set("run.seed", &seed.to_string())?;
    }
    if let Some((key, b)) = budget {
        cfg.set(key, &b.to_string())?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, HarnessError> {
    match cli.command {
        Command::RunSail { cfg, budget, out } => {
            commands::run_sail_cmd(load(&cfg, budget.map(|b| ("sail.budget", b)))?, &out)
        }
        Command::RunMapElites { cfg, budget, out } => {
            commands::run_map_elites_cmd(load(&cfg, budget.map(|b| ("me.budget", b)))?, &out)
        }
        Command::SamplingStudy { cfg, oracle, out } => {
            let cfg = load(&cfg, None)?;
            let oracle = commands::oracle_path(&cfg, oracle.as_deref())?;
            commands::sampling_study_cmd(cfg, &oracle, &out)
        }
        Command::ExportMap { input, format, out } => {
            let format = match format {
                Format::Csv => ExportFormat::Csv,
                Format::Pgm => ExportFormat::Pgm,
            };
            commands::export_map_cmd(&input, format, &out)
        }
        Command::GenOracle { cfg, out } => {
            let cfg = load(&cfg, None)?;
            let out = commands::oracle_path(&cfg, out.as_deref())?;
            commands::gen_oracle_cmd(cfg, Path::new(&out))
        }
        Command::EvalBase { cfg, out } => commands::eval_base_cmd(load(&cfg, None)?, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sail: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
