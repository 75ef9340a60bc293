//! Simulates spine paths by thinning and compares the endpoint law for
//! two terminal times.

use spinebranch::model::ModelParams;
use spinebranch::spinesim::{replica_spine, simulate_spine};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    let path = simulate_spine(&p, 1.0, 3.0, 11)?;
    println!("one path on [0, 3] with {} jumps", path.jumps.len());
    for (t, x) in &path.jumps {
        println!("  jump at {t:.4} to size {x:.4}");
    }
    println!("  endpoint {:.4}", path.endpoint());

    for t in [1.0, 5.0] {
        let n = 20_000;
        let mean: f64 = (0..n)
            .map(|i| replica_spine(&p, 0.0, 1.0, t, 5, i).map(|s| s.endpoint()))
            .sum::<spinebranch::Result<f64>>()?
            / n as f64;
        println!("t = {t}: mean endpoint over {n} paths {mean:.4}");
    }
    Ok(())
}
