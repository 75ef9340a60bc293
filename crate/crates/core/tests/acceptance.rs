//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use spinebranch::config::ExperimentConfig;
use spinebranch::functional::NamedFunctional;
use spinebranch::model::ModelParams;
use spinebranch::runner::{read_csv_bodies, run_check, run_suite};
use spinebranch::verify::{
    CheckOutcome, CheckRow, ContractionConfig, DriftConfig, KernelSamplerConfig, LlnConfig, ManyToOneConfig,
    MartingaleConfig, MeanCountConfig, MomentsConfig, QuadratureConfig, Status, VarianceRatioConfig,
};

const SIGMAS: f64 = 3.0;

fn baseline() -> ExperimentConfig {
    let mut cfg = ExperimentConfig { model: ModelParams::baseline(), ..ExperimentConfig::default() };
    cfg.harness.sigmas = SIGMAS;
    cfg
}

fn timed(cfg: &ExperimentConfig, name: &str) -> (CheckOutcome, f64) {
    let start = Instant::now();
    let out = run_check(cfg, name).unwrap();
    (out, start.elapsed().as_secs_f64())
}

fn rows<'a>(o: &'a CheckOutcome, prefix: &'a str) -> impl Iterator<Item = &'a CheckRow> + 'a {
    o.rows.iter().filter(move |r| r.param_point.starts_with(prefix))
}

fn one<'a>(o: &'a CheckOutcome, prefix: &'a str) -> &'a CheckRow {
    rows(o, prefix).next().unwrap_or_else(|| panic!("{}: no row {prefix}", o.name))
}

struct Report(Vec<(u32, bool)>);

impl Report {
    fn record(&mut self, id: u32, title: &str, ok: bool, detail: String) {
        println!("criterion {id:>2} {title}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        self.0.push((id, ok));
    }
}

fn main() -> ExitCode {
    let mut rep = Report(Vec::new());

    // 1. Mean count.
    let mut cfg = baseline();
    cfg.checks.mean_count = MeanCountConfig { x0: 1.0, t: 1.5, n: 20_000, seed: None };
    let (o, secs) = timed(&cfg, "mean_count");
    let r = &o.rows[0];
    let target = 1.5f64.exp();
    let ok = o.passed() && (r.estimate - target).abs() <= SIGMAS * r.std_error && secs < 60.0;
    rep.record(
        1,
        "mean count",
        ok,
        format!("N̄ = {:.4} ± {:.4}, target {target:.4}, {secs:.1}s", r.estimate, r.std_error),
    );

    // 2. Many-to-One.
    cfg.checks.many_to_one = ManyToOneConfig {
        x0: 1.0,
        t: 1.0,
        duration: 0.5,
        functionals: vec![NamedFunctional::RecipOnePlusEndpoint],
        n_pop: 20_000,
        n_spine: 100_000,
        seed: None,
    };
    let (o, _) = timed(&cfg, "many_to_one");
    let pop = one(&o, "F=recip_one_plus_endpoint;side=population");
    let spine = one(&o, "F=recip_one_plus_endpoint;side=spine");
    let combined = (pop.std_error.powi(2) + spine.std_error.powi(2)).sqrt();
    let ok = o.passed() && (pop.estimate - spine.estimate).abs() <= SIGMAS * combined;
    rep.record(
        2,
        "many-to-one",
        ok,
        format!("population {:.5}, spine {:.5}, combined SE {combined:.5}", pop.estimate, spine.estimate),
    );

    // 3. Kernel sampler.
    cfg.checks.kernel_sampler = KernelSamplerConfig { x: 1.0, s: 0.0, t: 1.0, n: 100_000, max_ks: 0.01, seed: None };
    let (o, _) = timed(&cfg, "kernel_sampler");
    let ks = o.rows[0].estimate;
    rep.record(3, "kernel sampler", o.passed() && ks < 0.01, format!("KS = {ks:.5}"));

    // 4. Quadrature.
    cfg.checks.quadrature = QuadratureConfig {
        simpson_step: 1e-5,
        constant_tolerance: 1e-10,
        simpson_tolerance: 1e-8,
        ..QuadratureConfig::default()
    };
    let (o, _) = timed(&cfg, "quadrature");
    let rel = |prefix: &str| {
        rows(&o, prefix)
            .filter_map(|r| r.bound_or_target.map(|b| (r.estimate - b).abs() / b.abs().max(f64::MIN_POSITIVE)))
            .filter(|e| e.is_finite())
            .fold(0.0, f64::max)
    };
    let (c, s) = (rel("env=constant"), rel("env=sinusoidal"));
    rep.record(
        4,
        "quadrature",
        o.passed() && c <= 1e-10 && s <= 1e-8,
        format!("max rel error constant {c:.1e}, sinusoidal {s:.1e}"),
    );

    // 5. Drift.
    cfg.checks.drift = DriftConfig {
        x_grid: vec![0.2, 0.5, 1.0, 2.0, 5.0],
        s_grid: vec![0.0, 1.0],
        h: 0.05,
        n: 50_000,
        ..DriftConfig::default()
    };
    let (o, _) = timed(&cfg, "drift");
    let d = cfg.model.drift_constants().d;
    let ok = o.passed() && o.rows.len() == 10 && (d - 4.5762674).abs() <= 1e-6;
    rep.record(5, "drift inequality", ok, format!("{} points, d = {d:.7}", o.rows.len()));

    // 6. Moment caps.
    cfg.checks.moments = MomentsConfig { p_list: vec![-1, 1, 2, 3], ..MomentsConfig::default() };
    let (o, _) = timed(&cfg, "moments");
    let within = |prefix: &str| {
        let rs: Vec<_> = rows(&o, prefix).collect();
        !rs.is_empty() && rs.iter().all(|r| r.estimate <= r.bound_or_target.unwrap() + SIGMAS * r.std_error)
    };
    let p1_cap = rows(&o, "x0=1;p=1;").all(|r| r.bound_or_target == Some(4.0));
    let ok = o.passed()
        && p1_cap
        && within("x0=1;p=1;")
        && within("x0=1;p=-1;")
        && within("x0=1;p=2;")
        && within("x0=1;p=3;");
    rep.record(6, "moment caps", ok, format!("{} rows", o.rows.len()));

    // 7. Variance ratio.
    cfg.checks.variance_ratio = VarianceRatioConfig { x0: 1.0, t_grid: vec![0.5, 1.0, 1.5], n: 10_000, seed: None };
    let (o, _) = timed(&cfg, "variance_ratio");
    let worst = o.rows.iter().map(|r| r.estimate + SIGMAS * r.std_error).fold(0.0, f64::max);
    rep.record(7, "variance ratio", o.passed() && worst <= 5.0, format!("max estimate + 3 SE = {worst:.4}, bound 5"));

    // 8. Martingale.
    cfg.checks.martingale = MartingaleConfig { x0: 1.0, r: 0.0, s: 0.5, t: 1.0, n: 50_000, seed: None };
    let (o, _) = timed(&cfg, "martingale");
    let r = &o.rows[0];
    let ok = o.passed() && (r.estimate - 1.0).abs() <= SIGMAS * r.std_error;
    rep.record(8, "martingale normalization", ok, format!("mean weight {:.5} ± {:.5}", r.estimate, r.std_error));

    // 9. LLN decay.
    let grid = vec![0.5, 1.5, 2.5, 3.5];
    cfg.checks.lln = LlnConfig {
        functional: NamedFunctional::RecipOnePlusEndpoint,
        duration: 0.5,
        t_grid: grid.clone(),
        n: 10_000,
        ..LlnConfig::default()
    };
    let (o, secs) = timed(&cfg, "lln");
    let drop = one(&o, "quantity=l2_drop");
    let slope = one(&o, "quantity=l2_slope");
    let indep = one(&o, "quantity=x1_independence");
    let ok = o.passed()
        && drop.estimate > SIGMAS * drop.std_error
        && slope.estimate < 0.0
        && indep.outcome == Status::Pass
        && secs <= 900.0;
    rep.record(
        9,
        "LLN decay",
        ok,
        format!("L2 drop {:.5} ± {:.5}, slope {:.3}, {secs:.1}s", drop.estimate, drop.std_error, slope.estimate),
    );

    // 10. Contraction.
    cfg.checks.contraction = ContractionConfig {
        x: 0.5,
        y: 5.0,
        functional: NamedFunctional::RecipOnePlusEndpoint,
        duration: 0.5,
        t_grid: grid,
        n: 100_000,
        cauchy: true,
        seed: None,
    };
    let (o, _) = timed(&cfg, "contraction");
    let slope = one(&o, "quantity=slope");
    let upper = slope.estimate + SIGMAS * slope.std_error;
    let cauchy = one(&o, "quantity=cauchy_decrease");
    let ok = o.passed() && upper < 0.0 && cauchy.outcome == Status::Pass;
    rep.record(10, "contraction", ok, format!("slope {:.3}, upper CI {upper:.3}", slope.estimate));

    // 11. Determinism of the full suite across worker counts.
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut first = baseline();
    first.out_dir = a.path().to_path_buf();
    first.workers = Some(1);
    let mut second = first.clone();
    second.out_dir = b.path().to_path_buf();
    second.workers = Some(4);
    let ra = run_suite(&first).unwrap();
    run_suite(&second).unwrap();
    let names: Vec<String> = first.selected().iter().map(|s| s.to_string()).collect();
    let same = read_csv_bodies(a.path(), &names).unwrap() == read_csv_bodies(b.path(), &names).unwrap();
    rep.record(
        11,
        "determinism",
        same,
        format!("{} CSVs compared, suite {} in {:.1}s", names.len(), ra.status(), ra.manifest.wall_clock_seconds),
    );

    let failed: Vec<u32> = rep.0.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if failed.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
