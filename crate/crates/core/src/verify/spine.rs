//! Checks that simulate the spine alone.

use serde::{Deserialize, Serialize};

use super::{point, CheckOutcome, CheckRow, Harness, NamedFit, Status};
use crate::error::{Error, Result};
use crate::functional::{NamedFunctional, PathFunctional};
use crate::mc;
use crate::model::{lyapunov_v, ModelParams};
use crate::rng::{stream, tagged_seed};
use crate::spinesim::{martingale_weight_with, replica_spine, simulate_spine_from, spine_value_at, SpineOptions};
use crate::stats::{combined_se, Accumulator, DecayFit, DecayPoint};

fn mean_se(acc: &Accumulator) -> (f64, f64) {
    (acc.mean(), (acc.variance() / acc.count() as f64).sqrt())
}

fn positive_grid(key: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid(key, "a non-empty list of positive sizes"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    pub x_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Terminal time of the spine.
    pub t: f64,
    pub h: f64,
    pub n: u64,
    /// Second-order allowance `c_h = factor·(aV(x) + d)`.
    pub c_h_factor: f64,
    pub seed: Option<u64>,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            x_grid: vec![0.2, 0.5, 1.0, 2.0, 5.0],
            s_grid: vec![0.0, 1.0],
            t: 2.0,
            h: 0.05,
            n: 50_000,
            c_h_factor: 10.0,
            seed: None,
        }
    }
}

/// Finite-difference generator `(E[V(Y_{s+h})] − V(x)) / h` against `−aV(x) + d`.
pub fn check_drift(params: &ModelParams, cfg: &DriftConfig, harness: &Harness, seed: u64) -> Result<CheckOutcome> {
    positive_grid("drift.x_grid", &cfg.x_grid)?;
    if !(cfg.h > 0.0) {
        return Err(Error::invalid("drift.h", "h > 0"));
    }
    if cfg.n < 2 {
        return Err(Error::invalid("drift.n", "n ≥ 2"));
    }
    let consts = params.drift_constants();
    let mut out = CheckOutcome::new("drift", cfg.n, seed);
    out.notes.push(format!("d = {}", consts.d));
    for &s in &cfg.s_grid {
        if !(s >= 0.0 && s + cfg.h <= cfg.t) {
            return Err(Error::invalid("drift.s_grid", "0 ≤ s and s + h ≤ t"));
        }
        for &x in &cfg.x_grid {
            let v = lyapunov_v(x)?;
            let sub = tagged_seed(seed, &format!("x={x}:s={s}"));
            let [acc] = mc::accumulate(cfg.n, |i| {
                let mut rng = stream(sub, i);
                Ok([lyapunov_v(spine_value_at(params, s, x, s + cfg.h, cfg.t, &mut rng)?)?])
            })?;
            let (mean, se) = mean_se(&acc);
            let est = (mean - v) / cfg.h;
            let se = se / cfg.h;
            let bound = params.drift_bound(x)?;
            let slack = cfg.c_h_factor * (params.a() * v + consts.d) * cfg.h;
            out.rows.push(CheckRow {
                param_point: point(&[("x", &x), ("s", &s), ("h", &cfg.h)]),
                t: Some(cfg.t),
                estimate: est,
                std_error: se,
                bound_or_target: Some(bound),
                outcome: harness.upper(est, se, bound, slack, bound.abs() + slack),
                n: cfg.n,
            });
        }
    }
    let notes = std::mem::take(&mut out.notes);
    let mut out = out.settle();
    out.notes = notes;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub x0_list: Vec<f64>,
    /// Moment orders: −1 or positive integers.
    pub p_list: Vec<i32>,
    pub t: f64,
    pub s_grid: Vec<f64>,
    pub n: u64,
    pub seed: Option<u64>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            x0_list: vec![1.0, 4.0],
            p_list: vec![-1, 1, 2, 3],
            t: 3.0,
            s_grid: (0..=6).map(|i| i as f64 * 0.5).collect(),
            n: 20_000,
            seed: None,
        }
    }
}

/// `Ê[(Y_s^{(t)})^p]` against the moment caps; one path set per start size
/// serves every order and grid time.
pub fn check_moments(params: &ModelParams, cfg: &MomentsConfig, harness: &Harness, seed: u64) -> Result<CheckOutcome> {
    positive_grid("moments.x0_list", &cfg.x0_list)?;
    if cfg.p_list.iter().any(|&p| p != -1 && p < 1) {
        return Err(Error::invalid("moments.p_list", "orders in {−1} ∪ {1, 2, …}"));
    }
    if cfg.s_grid.iter().any(|&s| !(s >= 0.0 && s <= cfg.t)) {
        return Err(Error::invalid("moments.s_grid", "0 ≤ s ≤ t"));
    }
    if cfg.n < 2 {
        return Err(Error::invalid("moments.n", "n ≥ 2"));
    }
    let mut out = CheckOutcome::new("moments", cfg.n, seed);
    let k = cfg.p_list.len() * cfg.s_grid.len();
    for &x0 in &cfg.x0_list {
        let sub = tagged_seed(seed, &format!("x0={x0}"));
        let accs = mc::accumulate_dyn(cfg.n, k, |i| {
            let path = replica_spine(params, 0.0, x0, cfg.t, sub, i)?;
            let mut v = Vec::with_capacity(k);
            for &p in &cfg.p_list {
                for &s in &cfg.s_grid {
                    v.push(path.value_at(s).powi(p));
                }
            }
            Ok(v)
        })?;
        let mut j = 0;
        for &p in &cfg.p_list {
            for &s in &cfg.s_grid {
                let (est, se) = mean_se(&accs[j]);
                j += 1;
                let cap = if p == -1 { params.harmonic_moment_cap(x0, s)? } else { params.moment_cap(p as u32, x0)? };
                out.rows.push(CheckRow {
                    param_point: point(&[("x0", &x0), ("p", &p), ("s", &s)]),
                    t: Some(cfg.t),
                    estimate: est,
                    std_error: se,
                    bound_or_target: Some(cap),
                    outcome: harness.upper(est, se, cap, 0.0, cap),
                    n: cfg.n,
                });
            }
        }
    }
    Ok(out.settle())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemigroupDriftConfig {
    pub x_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub t: f64,
    pub n: u64,
    pub seed: Option<u64>,
}

impl Default for SemigroupDriftConfig {
    fn default() -> Self {
        SemigroupDriftConfig {
            x_grid: vec![0.2, 0.5, 1.0, 2.0, 5.0],
            s_grid: vec![0.5, 1.0, 2.0, 3.0],
            t: 3.0,
            n: 20_000,
            seed: None,
        }
    }
}

/// `E_x[V(Y_s^{(t)})]` against `e^{−as}V(x) + (d/a)(1 − e^{−as})`.
pub fn check_semigroup_drift(
    params: &ModelParams,
    cfg: &SemigroupDriftConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    positive_grid("semigroup_drift.x_grid", &cfg.x_grid)?;
    if cfg.s_grid.iter().any(|&s| !(s >= 0.0 && s <= cfg.t)) {
        return Err(Error::invalid("semigroup_drift.s_grid", "0 ≤ s ≤ t"));
    }
    if cfg.n < 2 {
        return Err(Error::invalid("semigroup_drift.n", "n ≥ 2"));
    }
    let mut out = CheckOutcome::new("semigroup_drift", cfg.n, seed);
    for &x in &cfg.x_grid {
        let sub = tagged_seed(seed, &format!("x={x}"));
        let accs = mc::accumulate_dyn(cfg.n, cfg.s_grid.len(), |i| {
            let path = replica_spine(params, 0.0, x, cfg.t, sub, i)?;
            cfg.s_grid.iter().map(|&s| lyapunov_v(path.value_at(s))).collect()
        })?;
        for (acc, &s) in accs.iter().zip(&cfg.s_grid) {
            let (est, se) = mean_se(acc);
            let bound = params.semigroup_drift_bound(x, s)?;
            out.rows.push(CheckRow {
                param_point: point(&[("x", &x), ("s", &s)]),
                t: Some(cfg.t),
                estimate: est,
                std_error: se,
                bound_or_target: Some(bound),
                outcome: harness.upper(est, se, bound, 0.0, bound),
                n: cfg.n,
            });
        }
    }
    Ok(out.settle())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionConfig {
    pub x: f64,
    pub y: f64,
    pub functional: NamedFunctional,
    pub duration: f64,
    pub t_grid: Vec<f64>,
    pub n: u64,
    /// Also test convergence of `P_{0,t,T}F(x)` in `t` (constant environments only).
    pub cauchy: bool,
    pub seed: Option<u64>,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        ContractionConfig {
            x: 0.5,
            y: 5.0,
            functional: NamedFunctional::RecipOnePlusEndpoint,
            duration: 0.5,
            t_grid: vec![0.5, 1.5, 2.5, 3.5],
            n: 100_000,
            cauchy: true,
            seed: None,
        }
    }
}

/// `|P_{0,t,T}F(x) − P_{0,t,T}F(y)|` on a grid with a log-linear fit.
///
/// Both starts share the random stream of each replica, so the standard error
/// comes from the paired differences. Passes when the upper end of the slope
/// interval is negative; when no two grid points are resolved from zero the
/// outcome is inconclusive.
pub fn estimate_contraction(
    params: &ModelParams,
    cfg: &ContractionConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    if !(cfg.x > 0.0 && cfg.y > 0.0) {
        return Err(Error::invalid("contraction.x", "x > 0 and y > 0"));
    }
    if cfg.functional.sup_norm().is_none() {
        return Err(Error::invalid("contraction.functional", "bounded functional"));
    }
    if cfg.t_grid.len() < 2 || cfg.t_grid.windows(2).any(|w| w[1] <= w[0]) || cfg.t_grid[0] < 0.0 {
        return Err(Error::invalid("contraction.t_grid", "at least 2 nonnegative, strictly increasing times"));
    }
    if cfg.n < 2 {
        return Err(Error::invalid("contraction.n", "n ≥ 2"));
    }
    let f = &cfg.functional;
    let dur = cfg.duration;
    let mut out = CheckOutcome::new("contraction", cfg.n, seed);
    let mut diffs = Vec::new();
    let mut levels = Vec::new();
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let sub = tagged_seed(seed, &format!("t={k}"));
        let [d, fx] = mc::accumulate(cfg.n, |i| {
            let px = replica_spine(params, 0.0, cfg.x, t + dur, sub, i)?;
            let py = replica_spine(params, 0.0, cfg.y, t + dur, sub, i)?;
            let vx = f.eval(&px.window(t, dur)?);
            let vy = f.eval(&py.window(t, dur)?);
            Ok([vx - vy, vx])
        })?;
        let (dm, dse) = mean_se(&d);
        let (xm, xse) = mean_se(&fx);
        let resolved = dm.abs() > 2.0 * dse && dm != 0.0;
        out.rows.push(CheckRow {
            param_point: point(&[("quantity", &"difference"), ("x", &cfg.x), ("y", &cfg.y), ("T", &dur)]),
            t: Some(t),
            estimate: dm.abs(),
            std_error: dse,
            bound_or_target: Some(2.0 * dse),
            outcome: if resolved { Status::Pass } else { Status::Inconclusive },
            n: cfg.n,
        });
        out.rows.push(CheckRow {
            param_point: point(&[("quantity", &"spine_mean"), ("x", &cfg.x), ("T", &dur)]),
            t: Some(t),
            estimate: xm,
            std_error: xse,
            bound_or_target: None,
            outcome: Status::Pass,
            n: cfg.n,
        });
        diffs.push(DecayPoint { t, value: dm.abs(), std_error: dse });
        levels.push((t, xm, xse));
    }
    let fit = DecayFit::fit(diffs)?;
    let status = match fit.slope_ci {
        Some((_, hi)) if hi < 0.0 => Status::Pass,
        Some((lo, _)) if lo > 0.0 => Status::Fail,
        _ => Status::Inconclusive,
    };
    out.rows.push(CheckRow {
        param_point: point(&[("quantity", &"slope"), ("x", &cfg.x), ("y", &cfg.y), ("T", &dur)]),
        t: None,
        estimate: fit.slope.unwrap_or(f64::NAN),
        std_error: fit.slope_se.unwrap_or(f64::NAN),
        bound_or_target: Some(0.0),
        outcome: status,
        n: fit.used as u64,
    });
    // Unresolved grid points are reported but only the fit decides.
    for r in out
        .rows
        .iter_mut()
        .filter(|r| r.outcome == Status::Inconclusive && r.param_point.starts_with("quantity=difference"))
    {
        r.outcome = Status::Pass;
    }
    if fit.used < cfg.t_grid.len() {
        out.notes.push(format!("{} of {} grid differences resolved from zero", fit.used, cfg.t_grid.len()));
    }
    out.fits.push(NamedFit { label: "difference".into(), fit });

    if cfg.cauchy && levels.len() >= 3 {
        if params.env().is_constant() {
            let steps: Vec<(f64, f64, f64)> =
                levels.windows(2).map(|w| (w[1].0, (w[1].1 - w[0].1).abs(), combined_se(w[0].2, w[1].2))).collect();
            for &(t, d, se) in &steps {
                out.rows.push(CheckRow {
                    param_point: point(&[("quantity", &"cauchy_step"), ("x", &cfg.x), ("T", &dur)]),
                    t: Some(t),
                    estimate: d,
                    std_error: se,
                    bound_or_target: None,
                    outcome: Status::Pass,
                    n: cfg.n,
                });
            }
            let (first, last) = (steps[0], steps[steps.len() - 1]);
            let se = combined_se(first.2, last.2);
            let gap = first.1 - last.1;
            let outcome = if gap > harness.sigmas * se {
                Status::Pass
            } else if -gap > harness.sigmas * se {
                Status::Fail
            } else {
                Status::Inconclusive
            };
            out.rows.push(CheckRow {
                param_point: point(&[("quantity", &"cauchy_decrease"), ("x", &cfg.x), ("T", &dur)]),
                t: Some(last.0),
                estimate: gap,
                std_error: se,
                bound_or_target: Some(harness.sigmas * se),
                outcome,
                n: cfg.n,
            });
        } else {
            out.notes.push("convergence in t is only tested for a constant environment".into());
        }
    }
    Ok(out.settle())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartingaleConfig {
    pub x0: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub n: u64,
    pub seed: Option<u64>,
}

impl Default for MartingaleConfig {
    fn default() -> Self {
        MartingaleConfig { x0: 1.0, r: 0.0, s: 0.5, t: 1.0, n: 50_000, seed: None }
    }
}

/// Mean Feynman–Kac weight against 1 (constant environments only).
pub fn check_martingale(
    params: &ModelParams,
    cfg: &MartingaleConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    if cfg.n < 2 {
        return Err(Error::invalid("martingale.n", "n ≥ 2"));
    }
    let [acc] = mc::accumulate(cfg.n, |i| {
        let mut rng = stream(seed, i);
        Ok([martingale_weight_with(params, cfg.x0, cfg.r, cfg.s, cfg.t, &mut rng, seed)?.weight])
    })?;
    let (est, se) = mean_se(&acc);
    let mut out = CheckOutcome::new("martingale", cfg.n, seed);
    out.rows.push(CheckRow {
        param_point: point(&[("x0", &cfg.x0), ("r", &cfg.r), ("s", &cfg.s)]),
        t: Some(cfg.t),
        estimate: est,
        std_error: se,
        bound_or_target: Some(1.0),
        outcome: harness.equal(est, se, 1.0),
        n: cfg.n,
    });
    Ok(out.settle())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThinningConfig {
    pub x0: f64,
    pub t: f64,
    pub n: u64,
    /// Step of the trapezoidal hazard oracle.
    pub grid_step: f64,
    pub max_ks: f64,
    pub seed: Option<u64>,
}

impl Default for ThinningConfig {
    fn default() -> Self {
        ThinningConfig { x0: 1.0, t: 1.0, n: 100_000, grid_step: 1e-5, max_ks: 0.01, seed: None }
    }
}

/// Law of the first spine jump time against `1 − exp(−∫_0^u B̂_v(x0 e^{av}) dv)`
/// computed on a fine grid; samples without a jump before `t` are censored.
pub fn check_thinning(params: &ModelParams, cfg: &ThinningConfig, seed: u64) -> Result<CheckOutcome> {
    if !(cfg.x0 > 0.0 && cfg.t > 0.0 && cfg.grid_step > 0.0) {
        return Err(Error::invalid("thinning", "x0 > 0, t > 0 and grid_step > 0"));
    }
    if cfg.n < 2 {
        return Err(Error::invalid("thinning.n", "n ≥ 2"));
    }
    let first = mc::collect(cfg.n, |i| {
        let mut rng = stream(seed, i);
        let path = simulate_spine_from(params, 0.0, cfg.x0, cfg.t, &mut rng, SpineOptions::default())?;
        Ok(path.jumps.first().map(|j| j.0))
    })?;
    let mut times: Vec<f64> = first.into_iter().flatten().collect();
    times.sort_by(f64::total_cmp);

    let steps = (cfg.t / cfg.grid_step).ceil() as usize;
    let h = cfg.t / steps as f64;
    let a = params.a();
    let rate = |u: f64| params.aux_jump_rate(u, cfg.t, cfg.x0 * (a * u).exp());
    let mut hazard = Vec::with_capacity(steps + 1);
    hazard.push(0.0);
    let mut prev = rate(0.0)?;
    for i in 1..=steps {
        let next = rate(i as f64 * h)?;
        hazard.push(hazard[i - 1] + 0.5 * h * (prev + next));
        prev = next;
    }
    let cdf = |u: f64| {
        let pos = (u / h).clamp(0.0, steps as f64);
        let i = (pos.floor() as usize).min(steps - 1);
        let frac = pos - i as f64;
        let hz = hazard[i] + frac * (hazard[i + 1] - hazard[i]);
        -(-hz).exp_m1()
    };
    let n = cfg.n as f64;
    let mut ks = 0.0_f64;
    for (i, &u) in times.iter().enumerate() {
        let f = cdf(u);
        ks = ks.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    ks = ks.max((times.len() as f64 / n - cdf(cfg.t)).abs());

    let mut out = CheckOutcome::new("thinning", cfg.n, seed);
    out.rows.push(CheckRow {
        param_point: point(&[("x0", &cfg.x0), ("statistic", &"ks_first_jump")]),
        t: Some(cfg.t),
        estimate: ks,
        std_error: 0.0,
        bound_or_target: Some(cfg.max_ks),
        outcome: if ks < cfg.max_ks { Status::Pass } else { Status::Fail },
        n: cfg.n,
    });
    Ok(out.settle())
}
