//! Runs a reduced version of the baseline suite from its TOML file.

use std::path::Path;

use spinebranch::config::ExperimentConfig;
use spinebranch::runner::{run_suite, summary_text};

fn main() -> spinebranch::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/baseline.toml");
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.select = ["mean_count", "quadrature", "variance_ratio", "martingale"].map(String::from).to_vec();
    cfg.checks.set_replicas(2_000);
    cfg.out_dir = std::env::temp_dir().join("spinebranch-example");
    cfg.validate()?;
    let report = run_suite(&cfg)?;
    print!("{}", summary_text(&report));
    println!("artifacts in {}", report.out_dir.display());
    Ok(())
}
