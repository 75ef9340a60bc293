//! Closed-form quantities of the model: mean mass, spine rates and the
//! constants behind the drift and moment bounds.

use spinebranch::model::{EnvironmentProfile, ModelParams};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    let periodic = ModelParams::new(1.0, 0.25, EnvironmentProfile::sinusoidal(1.0, 0.5))?;

    println!("{:>5} {:>12} {:>12}", "t", "m constant", "m periodic");
    for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
        println!("{t:>5} {:>12.6} {:>12.6}", p.mean_mass(1.0, 0.0, t)?, periodic.mean_mass(1.0, 0.0, t)?);
    }

    println!("\nspine jump rate at x = 1 against the population division rate:");
    for s in [0.0, 0.5, 0.9, 1.0] {
        println!("  s = {s}: {:.4} vs {:.4}", p.aux_jump_rate(s, 1.0, 1.0)?, p.division_rate(s, 1.0));
    }

    let k = p.drift_constants();
    println!("\ndrift constants: c = {}, d = {:.7}, C(ε) = {:.6}", k.c, k.d, k.c_eps);
    for p_ in 1..=3 {
        println!("moment cap p = {p_}, x0 = 1: {:.4}", p.moment_cap(p_, 1.0)?);
    }
    println!("harmonic cap at s = 1: {:.4}", p.harmonic_moment_cap(1.0, 1.0)?);
    println!("variance ratio bound at x = 1: {}", p.variance_ratio_bound(1.0)?);

    let quartiles: Vec<f64> =
        [0.25, 0.5, 0.75].iter().map(|&u| p.aux_kernel_sample(0.0, 1.0, 1.0, u)).collect::<Result<_, _>>()?;
    println!("spine offspring size quartiles at x = 1: {quartiles:.4?}");
    Ok(())
}
