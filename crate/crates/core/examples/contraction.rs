//! Spines started far apart forget their initial size.

use spinebranch::model::ModelParams;
use spinebranch::verify::{estimate_contraction, ContractionConfig, Harness};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    let cfg = ContractionConfig { n: 20_000, ..ContractionConfig::default() };
    let out = estimate_contraction(&p, &cfg, &Harness::default(), 5)?;
    for r in out
        .rows
        .iter()
        .filter(|r| r.param_point.starts_with("quantity=difference") || r.param_point.starts_with("quantity=slope"))
    {
        println!("{:<36} t={:?} {:.5} ± {:.5}", r.param_point, r.t, r.estimate, r.std_error);
    }
    println!("status: {}", out.status);
    Ok(())
}
