//! Suite execution and report emission.
//!
//! A run writes into its output directory:
//!
//! - `<check>.csv`, one per check, with the columns of [`crate::verify::CSV_HEADER`];
//! - `summary.json`, every [`CheckOutcome`] in machine-readable form;
//! - `summary.txt`, a short human-readable table;
//! - `manifest.txt`, flat `key=value` lines (toolkit version, config hash,
//!   per-check seeds and outcomes, wall-clock time);
//! - `resolved_config.toml`, the configuration with all check seeds written
//!   out, from which the run can be repeated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::verify::{self, CheckOutcome, Status};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs one check by name with its configured seed.
pub fn run_check(cfg: &ExperimentConfig, name: &str) -> Result<CheckOutcome> {
    let p = &cfg.model;
    let h = &cfg.harness;
    let c = &cfg.checks;
    let seed = cfg.check_seed(name);
    let result = match name {
        "mean_count" => verify::check_mean_count(p, &c.mean_count, h, seed),
        "many_to_one" => verify::check_many_to_one(p, &c.many_to_one, h, seed),
        "kernel_sampler" => verify::check_kernel_sampler(p, &c.kernel_sampler, seed),
        "quadrature" => verify::check_quadrature(p, &c.quadrature, seed),
        "drift" => verify::check_drift(p, &c.drift, h, seed),
        "moments" => verify::check_moments(p, &c.moments, h, seed),
        "variance_ratio" => verify::check_variance_ratio(p, &c.variance_ratio, h, seed),
        "martingale" => verify::check_martingale(p, &c.martingale, h, seed),
        "lln" => verify::check_lln(p, &c.lln, h, seed),
        "contraction" => verify::estimate_contraction(p, &c.contraction, h, seed),
        "growth_rate" => verify::estimate_growth_rate(p, &c.growth_rate, h, seed),
        "semigroup_drift" => verify::check_semigroup_drift(p, &c.semigroup_drift, h, seed),
        "thinning" => verify::check_thinning(p, &c.thinning, seed),
        "benefit_bound" => verify::check_benefit_bound(p, &c.benefit_bound, seed),
        other => return Err(Error::invalid("check", format!("unknown check `{other}`"))),
    };
    match result {
        Err(Error::Unsupported(msg)) => {
            let mut out = CheckOutcome::new(name, 0, seed);
            out.status = Status::Inconclusive;
            out.notes.push(format!("not applicable: {msg}"));
            Ok(out)
        }
        other => other,
    }
}

/// Runs the selected checks on a pool of `cfg.workers` threads.
/// The outcomes do not depend on the number of workers.
pub fn run_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckOutcome>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let names = cfg.selected();
    pool.install(|| names.par_iter().map(|n| run_check(cfg, n)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config_hash: String,
    pub name: String,
    pub seed: u64,
    pub checks: Vec<(String, u64, Status)>,
    pub status: Status,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "toolkit_version={}", self.toolkit_version);
        let _ = writeln!(out, "config_hash={}", self.config_hash);
        let _ = writeln!(out, "name={}", self.name);
        let _ = writeln!(out, "seed={}", self.seed);
        for (name, seed, status) in &self.checks {
            let _ = writeln!(out, "check.{name}.seed={seed}");
            let _ = writeln!(out, "check.{name}.outcome={status}");
        }
        let _ = writeln!(out, "outcome={}", self.status);
        let _ = writeln!(out, "wall_clock_seconds={:.3}", self.wall_clock_seconds);
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcomes: Vec<CheckOutcome>,
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn status(&self) -> Status {
        self.manifest.status
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    config_hash: &'a str,
    status: Status,
    checks: &'a [CheckOutcome],
}

/// Runs the selected checks and writes every artifact into `cfg.out_dir`.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<RunReport> {
    let started = Instant::now();
    let outcomes = run_checks(cfg)?;
    let status = Status::all(outcomes.iter().map(|o| o.status));
    let manifest = RunManifest {
        toolkit_version: TOOLKIT_VERSION.into(),
        config_hash: cfg.hash(),
        name: cfg.name.clone(),
        seed: cfg.seed,
        checks: outcomes.iter().map(|o| (o.name.clone(), o.seed, o.status)).collect(),
        status,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let report = RunReport { outcomes, manifest, out_dir: cfg.out_dir.clone() };
    write_artifacts(cfg, &report)?;
    Ok(report)
}

fn write_artifacts(cfg: &ExperimentConfig, report: &RunReport) -> Result<()> {
    let dir = &report.out_dir;
    fs::create_dir_all(dir)?;
    for o in &report.outcomes {
        fs::write(dir.join(format!("{}.csv", o.name)), o.to_csv())?;
    }
    let summary = Summary {
        name: &cfg.name,
        config_hash: &report.manifest.config_hash,
        status: report.status(),
        checks: &report.outcomes,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    fs::write(dir.join("summary.txt"), summary_text(report))?;
    fs::write(dir.join("manifest.txt"), report.manifest.to_text())?;
    fs::write(dir.join("resolved_config.toml"), cfg.resolved().to_toml_string()?)?;
    Ok(())
}

/// Human-readable summary: one line per check, then the notes.
pub fn summary_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment {} (config {})", report.manifest.name, &report.manifest.config_hash[..12]);
    for o in &report.outcomes {
        let passed = o.rows.iter().filter(|r| r.outcome == Status::Pass).count();
        let _ = writeln!(out, "{:<16} {:<12} rows {}/{} pass  seed {}", o.name, o.status, passed, o.rows.len(), o.seed);
        for note in &o.notes {
            let _ = writeln!(out, "    {note}");
        }
    }
    let _ = writeln!(out, "overall: {}", report.status());
    out
}

/// Exit status of a run: 0 all pass, 1 any fail, 2 inconclusive without failures.
pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 2,
    }
}

/// Exit status for an error, following the BSD `sysexits` conventions.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::Domain(_) | Error::Unsupported(_) => 64,
        Error::Parse(_) => 65,
        Error::Io(e) if e.kind() == std::io::ErrorKind::NotFound => 66,
        Error::Io(_) => 74,
        Error::Truncated { .. } => 3,
        Error::Numerical(_) => 70,
    }
}

/// Reads the CSV bodies written by a run, keyed by check name in suite order.
pub fn read_csv_bodies(dir: &Path, names: &[String]) -> Result<Vec<(String, String)>> {
    names.iter().map(|n| Ok((n.clone(), fs::read_to_string(dir.join(format!("{n}.csv")))?))).collect()
}
