//! Estimates the same lineage functional from whole populations and from
//! the spine.

use spinebranch::functional::NamedFunctional;
use spinebranch::model::{EnvironmentProfile, ModelParams};
use spinebranch::verify::{check_many_to_one, Harness, ManyToOneConfig};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::new(1.0, 0.25, EnvironmentProfile::sinusoidal(1.0, 0.5))?;
    let cfg = ManyToOneConfig {
        functionals: vec![NamedFunctional::RecipOnePlusEndpoint, NamedFunctional::CappedJumpCount(10)],
        n_pop: 5_000,
        n_spine: 20_000,
        ..ManyToOneConfig::default()
    };
    let out = check_many_to_one(&p, &cfg, &Harness::default(), 3)?;
    for r in &out.rows {
        println!("{:<55} {:.5} ± {:.5}  {}", r.param_point, r.estimate, r.std_error, r.outcome);
    }
    println!("overall: {}", out.status);
    Ok(())
}
