//! Monte Carlo drift of the Lyapunov function and spine moments against
//! their analytic bounds.

use spinebranch::model::ModelParams;
use spinebranch::verify::{check_drift, check_moments, DriftConfig, Harness, MomentsConfig};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    let h = Harness::default();
    let drift = check_drift(&p, &DriftConfig { s_grid: vec![0.0], n: 10_000, ..DriftConfig::default() }, &h, 2)?;
    for r in &drift.rows {
        println!(
            "{:<22} drift {:>8.4} ± {:.4}  bound {:>8.4}",
            r.param_point,
            r.estimate,
            r.std_error,
            r.bound_or_target.unwrap()
        );
    }
    let cfg =
        MomentsConfig { x0_list: vec![1.0], s_grid: vec![0.0, 1.0, 2.0, 3.0], n: 5_000, ..MomentsConfig::default() };
    let moments = check_moments(&p, &cfg, &h, 2)?;
    for r in &moments.rows {
        println!(
            "{:<18} {:>8.4} ± {:.4}  cap {:>9.4}",
            r.param_point,
            r.estimate,
            r.std_error,
            r.bound_or_target.unwrap()
        );
    }
    println!("drift {}, moments {}", drift.status, moments.status);
    Ok(())
}
