//! Law of large numbers: the population average of a lineage functional
//! approaches the spine expectation as t grows.

use spinebranch::model::ModelParams;
use spinebranch::verify::{check_lln, Harness, LlnConfig};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    let cfg = LlnConfig { t_grid: vec![0.5, 1.5, 2.5], n: 2_000, spine_max: 2_000_000, ..LlnConfig::default() };
    let out = check_lln(&p, &cfg, &Harness::default(), 17)?;
    for r in &out.rows {
        let t = r.t.map_or("-".to_string(), |t| t.to_string());
        println!("{:<40} t={t:<4} {:.6} ± {:.6}  {}", r.param_point, r.estimate, r.std_error, r.outcome);
    }
    for fit in &out.fits {
        println!("{}: slope {:?}", fit.label, fit.fit.slope);
    }
    Ok(())
}
