//! Any closure over a path window can be averaged along the spine.

use spinebranch::functional::PathWindow;
use spinebranch::model::ModelParams;
use spinebranch::spinesim::spine_expectation;

fn main() -> spinebranch::Result<()> {
    let p = ModelParams::baseline();
    // Time-average of the size over the window, on a fine grid.
    let average_size = |w: &PathWindow<'_>| {
        let values = w.default_grid();
        values.iter().sum::<f64>() / values.len() as f64
    };
    let jumped = |w: &PathWindow<'_>| if w.jump_count() > 0 { 1.0 } else { 0.0 };
    for t in [1.0, 3.0] {
        let a = spine_expectation(&p, 1.0, t, 0.5, &average_size, 20_000, 1)?;
        let b = spine_expectation(&p, 1.0, t, 0.5, &jumped, 20_000, 1)?;
        println!(
            "t = {t}: average size {:.4} ± {:.4}, P(jump) {:.4} ± {:.4}",
            a.mean, a.std_error, b.mean, b.std_error
        );
    }
    Ok(())
}
