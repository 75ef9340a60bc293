//! Simulates one population forest and inspects it.

use spinebranch::model::ModelParams;
use spinebranch::popsim::{simulate_forest, write_forest_dump, ForestCaps};

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    let forest = simulate_forest(&p, 1.0, 2.0, 7, ForestCaps::default())?;

    for t in [0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("t = {t}: {} alive, mean mass {:.3}", forest.count_at(t)?, p.mean_mass(1.0, 0.0, t)?);
    }

    println!("\nalive at the horizon:");
    for (label, size) in forest.population_at(2.0)? {
        println!("  {label:<10} size {size:.4}");
    }

    let dump = write_forest_dump(&forest);
    println!("\nfirst lines of the dump:");
    for line in dump.lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
