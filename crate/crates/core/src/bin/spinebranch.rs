use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinebranch::config::{self, ExperimentConfig};
use spinebranch::popsim::{simulate_forest, write_forest_dump, ForestCaps};
use spinebranch::runner::{error_exit_code, exit_code, run_suite, summary_text};
use spinebranch::spinesim::{replica_spine, write_spine_dump};
use spinebranch::verify::CHECK_NAMES;
use spinebranch::{Error, Result};

#[derive(Parser)]
#[command(
    name = "spinebranch",
    version,
    about = "Simulate a size-structured branching population and verify its spine by Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML); defaults to the baseline suite.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Set a dotted config key, e.g. `checks.lln.n=2000` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write CSVs, manifest and summaries.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Run seed, replacing the configured one.
        #[arg(long)]
        seed: Option<u64>,
        /// Replica budget applied to every Monte Carlo check.
        #[arg(long)]
        replicas: Option<u64>,
        /// Output directory, replacing `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run only this check (repeatable).
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Simulate one population forest and write its dump.
    SimulatePopulation {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = ForestCaps::default().max_individuals)]
        max_individuals: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate spine paths and write their dump.
    SimulateSpine {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        /// Terminal time.
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        paths: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available checks.
    ListChecks,
    /// Print the configuration format with its defaults.
    PrintConfigSchema,
}

fn load(cfg: &ConfigArgs) -> Result<ExperimentConfig> {
    ExperimentConfig::load_with_overrides(cfg.config.as_deref(), &cfg.overrides)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { cfg, seed, replicas, out, checks, workers } => {
            let mut config = load(&cfg)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(n) = replicas {
                config.checks.set_replicas(n);
            }
            if let Some(o) = out {
                config.out_dir = o;
            }
            if !checks.is_empty() {
                config.select = checks;
            }
            if workers.is_some() {
                config.workers = workers;
            }
            config.validate()?;
            let report = run_suite(&config)?;
            print!("{}", summary_text(&report));
            eprintln!("artifacts written to {}", report.out_dir.display());
            Ok(exit_code(report.status()))
        }
        Command::SimulatePopulation { cfg, x0, horizon, seed, max_individuals, out } => {
            let config = load(&cfg)?;
            let caps = ForestCaps { max_individuals };
            let forest = simulate_forest(&config.model, x0, horizon, seed, caps)?;
            emit(out.as_deref(), &write_forest_dump(&forest))?;
            if let Some(at) = forest.truncated_at() {
                eprintln!("truncated at t={at}: more than {max_individuals} individuals alive");
                return Ok(error_exit_code(&Error::Truncated { at }));
            }
            Ok(0)
        }
        Command::SimulateSpine { cfg, x0, t, seed, paths, out } => {
            let config = load(&cfg)?;
            let all =
                (0..paths).map(|i| replica_spine(&config.model, 0.0, x0, t, seed, i)).collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), &write_spine_dump(&all))?;
            Ok(0)
        }
        Command::ListChecks => {
            for name in CHECK_NAMES {
                println!("{name}");
            }
            Ok(0)
        }
        Command::PrintConfigSchema => {
            print!("{}", config::schema());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
