//! Checks that simulate whole populations.

use serde::{Deserialize, Serialize};

use super::{point, CheckOutcome, CheckRow, Harness, NamedFit, Status};
use crate::error::{Error, Result};
use crate::functional::{NamedFunctional, PathFunctional};
use crate::mc;
use crate::model::ModelParams;
use crate::popsim::{simulate_forest, Forest};
use crate::rng::{replica_seed, tagged_seed};
use crate::spinesim::spine_expectation;
use crate::stats::{combined_se, Accumulator, DecayFit, DecayPoint, EstimatorReport};

/// Per-forest values of `n` independent forests; truncated forests yield `None`.
fn forest_values<F>(
    params: &ModelParams,
    x0: f64,
    horizon: f64,
    n: u64,
    seed: u64,
    harness: &Harness,
    f: F,
) -> Result<Vec<Option<Vec<f64>>>>
where
    F: Fn(&Forest) -> Result<Vec<f64>> + Sync + Send,
{
    let caps = harness.caps();
    mc::collect(n, |i| {
        let forest = simulate_forest(params, x0, horizon, replica_seed(seed, i), caps)?;
        if forest.truncated() {
            return Ok(None);
        }
        f(&forest).map(Some)
    })
}

/// Accumulates column `k` of the non-truncated forest values.
fn column(values: &[Option<Vec<f64>>], k: usize) -> Accumulator {
    let mut acc = Accumulator::default();
    for v in values.iter().flatten() {
        acc.push(v[k]);
    }
    acc
}

fn truncated_count(values: &[Option<Vec<f64>>]) -> usize {
    values.iter().filter(|v| v.is_none()).count()
}

fn push_truncation(out: &mut CheckOutcome, harness: &Harness, truncated: usize, total: usize) {
    if truncated > 0 {
        out.notes.push(format!("{truncated} of {total} forests truncated and excluded"));
    }
    if harness.truncation(truncated, total) != Status::Pass {
        out.notes.push("truncated fraction above the admissible limit".into());
        out.status = out.status.combine(Status::Inconclusive);
    }
}

fn report(acc: &Accumulator, label: &str, seed: u64) -> Result<EstimatorReport> {
    acc.report(label, seed).map_err(|_| Error::Config(format!("{label}: fewer than 2 non-truncated replicas")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanCountConfig {
    pub x0: f64,
    pub t: f64,
    pub n: u64,
    pub seed: Option<u64>,
}

impl Default for MeanCountConfig {
    fn default() -> Self {
        MeanCountConfig { x0: 1.0, t: 1.5, n: 20_000, seed: None }
    }
}

/// `N̄_t` over `n` forests against `m(x0,0,t)`.
pub fn check_mean_count(
    params: &ModelParams,
    cfg: &MeanCountConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    if cfg.n < 100 {
        return Err(Error::invalid("mean_count.n", "n ≥ 100"));
    }
    let t = cfg.t;
    let values = forest_values(params, cfg.x0, t, cfg.n, seed, harness, |f| Ok(vec![f.count_at(t)? as f64]))?;
    let r = report(&column(&values, 0), "N_t", seed)?;
    let target = params.mean_mass(cfg.x0, 0.0, t)?;
    let mut out = CheckOutcome::new("mean_count", cfg.n, seed);
    out.rows.push(CheckRow {
        param_point: point(&[("x0", &cfg.x0)]),
        t: Some(t),
        estimate: r.mean,
        std_error: r.std_error,
        bound_or_target: Some(target),
        outcome: harness.equal(r.mean, r.std_error, target),
        n: r.n_replicas as u64,
    });
    let mut out = out.settle();
    push_truncation(&mut out, harness, truncated_count(&values), values.len());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManyToOneConfig {
    pub x0: f64,
    pub t: f64,
    pub duration: f64,
    pub functionals: Vec<NamedFunctional>,
    pub n_pop: u64,
    pub n_spine: u64,
    pub seed: Option<u64>,
}

impl Default for ManyToOneConfig {
    fn default() -> Self {
        ManyToOneConfig {
            x0: 1.0,
            t: 1.0,
            duration: 0.5,
            functionals: vec![NamedFunctional::RecipOnePlusEndpoint, NamedFunctional::CappedJumpCount(10)],
            n_pop: 20_000,
            n_spine: 100_000,
            seed: None,
        }
    }
}

/// Population estimator `Σ_u F(lineage window) / m(x0,0,t+T)` against the
/// spine estimator `E[F(Y window)]`, one pair of rows per functional.
///
/// Forest `i` uses seed `replica_seed(seed, i)`, as in [`check_mean_count`].
pub fn check_many_to_one(
    params: &ModelParams,
    cfg: &ManyToOneConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    for f in &cfg.functionals {
        if f.sup_norm().is_none() {
            return Err(Error::invalid("many_to_one.functionals", format!("`{f}` must be bounded")));
        }
    }
    let (t, dur) = (cfg.t, cfg.duration);
    let m = params.mean_mass(cfg.x0, 0.0, t + dur)?;
    let fs = &cfg.functionals;
    let values = forest_values(params, cfg.x0, t + dur, cfg.n_pop, seed, harness, |forest| {
        fs.iter().map(|f| Ok(forest.lineage_sum_and_count(t, dur, f)?.0 / m)).collect()
    })?;
    let mut out = CheckOutcome::new("many_to_one", cfg.n_pop + cfg.n_spine, seed);
    for (k, f) in fs.iter().enumerate() {
        let pop = report(&column(&values, k), "population", seed)?;
        let spine_seed = tagged_seed(seed, &format!("spine:{f}"));
        let sp = spine_expectation(params, cfg.x0, t, dur, f, cfg.n_spine, spine_seed)?;
        let se = combined_se(pop.std_error, sp.std_error);
        let outcome = if se > harness.max_se_fraction * sp.mean.abs().max(f64::MIN_POSITIVE) {
            Status::Inconclusive
        } else if (pop.mean - sp.mean).abs() <= harness.sigmas * se + 1e-12 {
            Status::Pass
        } else {
            Status::Fail
        };
        let label = |side: &str| point(&[("F", f), ("side", &side), ("x0", &cfg.x0), ("T", &dur)]);
        out.rows.push(CheckRow {
            param_point: label("population"),
            t: Some(t),
            estimate: pop.mean,
            std_error: pop.std_error,
            bound_or_target: Some(sp.mean),
            outcome,
            n: pop.n_replicas as u64,
        });
        out.rows.push(CheckRow {
            param_point: label("spine"),
            t: Some(t),
            estimate: sp.mean,
            std_error: sp.std_error,
            bound_or_target: Some(pop.mean),
            outcome,
            n: sp.n_replicas as u64,
        });
    }
    let mut out = out.settle();
    push_truncation(&mut out, harness, truncated_count(&values), values.len());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceRatioConfig {
    pub x0: f64,
    pub t_grid: Vec<f64>,
    pub n: u64,
    pub seed: Option<u64>,
}

impl Default for VarianceRatioConfig {
    fn default() -> Self {
        VarianceRatioConfig { x0: 1.0, t_grid: vec![0.5, 1.0, 1.5], n: 10_000, seed: None }
    }
}

/// `Ê[(N_t/m(x0,0,t))²]` against its closed-form bound; one forest set serves the whole grid.
pub fn check_variance_ratio(
    params: &ModelParams,
    cfg: &VarianceRatioConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    if cfg.n < 1000 {
        return Err(Error::invalid("variance_ratio.n", "n ≥ 1000"));
    }
    let horizon = cfg.t_grid.iter().copied().fold(0.0, f64::max);
    let masses = cfg.t_grid.iter().map(|&t| params.mean_mass(cfg.x0, 0.0, t)).collect::<Result<Vec<_>>>()?;
    let values = forest_values(params, cfg.x0, horizon, cfg.n, seed, harness, |f| {
        cfg.t_grid.iter().zip(&masses).map(|(&t, m)| Ok((f.count_at(t)? as f64 / m).powi(2))).collect()
    })?;
    let bound = params.variance_ratio_bound(cfg.x0)?;
    let mut out = CheckOutcome::new("variance_ratio", cfg.n, seed);
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let r = report(&column(&values, k), "ratio", seed)?;
        out.rows.push(CheckRow {
            param_point: point(&[("x0", &cfg.x0)]),
            t: Some(t),
            estimate: r.mean,
            std_error: r.std_error,
            bound_or_target: Some(bound),
            outcome: harness.upper(r.mean, r.std_error, bound, 0.0, bound),
            n: r.n_replicas as u64,
        });
    }
    let mut out = out.settle();
    push_truncation(&mut out, harness, truncated_count(&values), values.len());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthRateConfig {
    pub x0_list: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub tolerance: f64,
    /// Forests per grid point for the Monte Carlo rows; 0 disables them.
    pub n: u64,
    /// Largest grid time that is also simulated.
    pub mc_t_max: f64,
    pub seed: Option<u64>,
}

impl Default for GrowthRateConfig {
    fn default() -> Self {
        GrowthRateConfig {
            x0_list: vec![1.0],
            t_grid: vec![1.0, 2.0, 3.0, 5.0, 10.0],
            tolerance: 0.05,
            n: 1000,
            mc_t_max: 3.0,
            seed: None,
        }
    }
}

/// `log m(x0,0,t) / t` on the grid; passes when the value at the largest time is
/// within `tolerance` of `a`. Monte Carlo rows compare `log N̄_t / t` with the
/// closed form at the simulated grid points.
pub fn estimate_growth_rate(
    params: &ModelParams,
    cfg: &GrowthRateConfig,
    harness: &Harness,
    seed: u64,
) -> Result<CheckOutcome> {
    if cfg.t_grid.is_empty() || cfg.t_grid.windows(2).any(|w| w[1] <= w[0]) || cfg.t_grid[0] <= 0.0 {
        return Err(Error::invalid("growth_rate.t_grid", "positive and strictly increasing"));
    }
    let a = params.a();
    let last = *cfg.t_grid.last().unwrap();
    let mut out = CheckOutcome::new("growth_rate", cfg.n, seed);
    for &x0 in &cfg.x0_list {
        for &t in &cfg.t_grid {
            let rate = params.mean_mass(x0, 0.0, t)?.ln() / t;
            let decisive = t == last;
            let outcome = if !decisive || (rate - a).abs() <= cfg.tolerance { Status::Pass } else { Status::Fail };
            out.rows.push(CheckRow {
                param_point: point(&[("x0", &x0), ("source", &"closed_form")]),
                t: Some(t),
                estimate: rate,
                std_error: 0.0,
                bound_or_target: Some(a),
                outcome,
                n: 0,
            });
        }
        if cfg.n == 0 {
            continue;
        }
        let grid: Vec<f64> = cfg.t_grid.iter().copied().filter(|&t| t <= cfg.mc_t_max).collect();
        let Some(&horizon) = grid.last() else { continue };
        let sub = tagged_seed(seed, &format!("x0={x0}"));
        let values = forest_values(params, x0, horizon, cfg.n, sub, harness, |f| {
            grid.iter().map(|&t| Ok(f.count_at(t)? as f64)).collect()
        })?;
        for (k, &t) in grid.iter().enumerate() {
            let r = report(&column(&values, k), "N_t", sub)?;
            let est = r.mean.ln() / t;
            let se = r.std_error / (r.mean * t);
            let target = params.mean_mass(x0, 0.0, t)?.ln() / t;
            out.rows.push(CheckRow {
                param_point: point(&[("x0", &x0), ("source", &"monte_carlo")]),
                t: Some(t),
                estimate: est,
                std_error: se,
                bound_or_target: Some(target),
                outcome: harness.equal(est, se, target),
                n: r.n_replicas as u64,
            });
        }
        let total = values.len();
        push_truncation(&mut out, harness, truncated_count(&values), total);
    }
    let notes = std::mem::take(&mut out.notes);
    let status = out.status;
    let mut out = out.settle();
    out.status = out.status.combine(status);
    out.notes = notes;
    Ok(out)
}

/// Normalization of the population side of the law of large numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlnNormalization {
    /// `(Σ_u F / N_{t+T} − P̂)²`.
    Population,
    /// `((Σ_u F − N_{t+T}·P̂) / m(x0,0,t+T))²`.
    MeanMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlnConfig {
    pub x0: f64,
    pub x1: f64,
    /// Second spine start used for the independence check at the largest time.
    pub x1_alt: Option<f64>,
    pub functional: NamedFunctional,
    pub duration: f64,
    pub t_grid: Vec<f64>,
    pub n: u64,
    pub normalization: LlnNormalization,
    pub spine_pilot: u64,
    pub spine_max: u64,
    /// Required ratio of spine standard error to population standard error.
    pub spine_se_ratio: f64,
    pub seed: Option<u64>,
}

impl Default for LlnConfig {
    fn default() -> Self {
        LlnConfig {
            x0: 1.0,
            x1: 2.0,
            x1_alt: Some(0.5),
            functional: NamedFunctional::RecipOnePlusEndpoint,
            duration: 0.5,
            t_grid: vec![0.5, 1.5, 2.5, 3.5],
            n: 10_000,
            normalization: LlnNormalization::Population,
            spine_pilot: 20_000,
            spine_max: 30_000_000,
            spine_se_ratio: 0.2,
            seed: None,
        }
    }
}

/// Spine estimate of `P_{0,t,T}F(x1)` whose standard error is at most
/// `ratio · target_se`, or the best estimate within `max` paths.
fn budgeted_spine(
    params: &ModelParams,
    x1: f64,
    t: f64,
    cfg: &LlnConfig,
    target_se: f64,
    seed: u64,
) -> Result<(EstimatorReport, bool)> {
    let f = &cfg.functional;
    let pilot = spine_expectation(params, x1, t, cfg.duration, f, cfg.spine_pilot.max(2), seed)?;
    let goal = cfg.spine_se_ratio * target_se;
    if pilot.std_error <= goal {
        return Ok((pilot, true));
    }
    let need = (pilot.sample_std() / goal).powi(2).ceil() as u64;
    let n = need.clamp(cfg.spine_pilot, cfg.spine_max.max(cfg.spine_pilot));
    let rep = spine_expectation(params, x1, t, cfg.duration, f, n, seed)?;
    let ok = rep.std_error <= goal * 1.05 || need <= n;
    Ok((rep, ok))
}

/// Squared distance between the empirical ancestral-path average and the
/// spine expectation started from `x1`, on a time grid.
///
/// Passes when the error at the largest time is below the error at the
/// smallest time by more than the combined tolerance, the fitted log-linear
/// slope is negative, and (if configured) the error at the largest time does
/// not depend on the spine's starting size. A spine estimate that cannot
/// reach the required precision within `spine_max` paths makes the check
/// inconclusive.
pub fn check_lln(params: &ModelParams, cfg: &LlnConfig, harness: &Harness, seed: u64) -> Result<CheckOutcome> {
    if cfg.t_grid.len() < 3 {
        return Err(Error::invalid("lln.t_grid", "at least 3 points"));
    }
    if cfg.t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("lln.t_grid", "strictly increasing"));
    }
    if cfg.functional.sup_norm().is_none() {
        return Err(Error::invalid("lln.functional", "bounded functional"));
    }
    if cfg.n < 2 {
        return Err(Error::invalid("lln.n", "n ≥ 2"));
    }
    let dur = cfg.duration;
    let f = &cfg.functional;
    let mut out = CheckOutcome::new("lln", cfg.n, seed);
    let mut status = Status::Pass;
    let mut l2_points = Vec::new();
    let last_k = cfg.t_grid.len() - 1;
    let mut truncated = 0;
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let pop_seed = tagged_seed(seed, &format!("population:{k}"));
        let m = params.mean_mass(cfg.x0, 0.0, t + dur)?;
        let values = forest_values(params, cfg.x0, t + dur, cfg.n, pop_seed, harness, |forest| {
            let (sum, count) = forest.lineage_sum_and_count(t, dur, f)?;
            Ok(vec![sum, count as f64])
        })?;
        truncated += truncated_count(&values);
        let kept: Vec<(f64, f64)> = values.into_iter().flatten().map(|v| (v[0], v[1])).collect();
        let mut avg = Accumulator::default();
        kept.iter().for_each(|&(s, c)| avg.push(s / c));
        let avg = report(&avg, "population_average", pop_seed)?;

        let spine_seed = tagged_seed(seed, &format!("spine:x1={}:{k}", cfg.x1));
        let (sp, resolved) = budgeted_spine(params, cfg.x1, t, cfg, avg.std_error, spine_seed)?;
        if !resolved {
            status = status.combine(Status::Inconclusive);
            out.notes.push(format!("spine estimate at t={t} did not reach the required precision"));
        }
        let l2 = l2_report(&kept, sp.mean, m, cfg.normalization, pop_seed)?;
        let base = |q: &str| point(&[("quantity", &q), ("x1", &cfg.x1), ("T", &dur)]);
        out.rows.push(CheckRow {
            param_point: base("population_average"),
            t: Some(t),
            estimate: avg.mean,
            std_error: avg.std_error,
            bound_or_target: Some(sp.mean),
            outcome: Status::Pass,
            n: avg.n_replicas as u64,
        });
        out.rows.push(CheckRow {
            param_point: base("spine_mean"),
            t: Some(t),
            estimate: sp.mean,
            std_error: sp.std_error,
            bound_or_target: Some(cfg.spine_se_ratio * avg.std_error),
            outcome: if resolved { Status::Pass } else { Status::Inconclusive },
            n: sp.n_replicas as u64,
        });
        out.rows.push(CheckRow {
            param_point: base("l2_error"),
            t: Some(t),
            estimate: l2.mean,
            std_error: l2.std_error,
            bound_or_target: None,
            outcome: Status::Pass,
            n: l2.n_replicas as u64,
        });
        l2_points.push(DecayPoint { t, value: l2.mean, std_error: l2.std_error });
        if k == last_k {
            if let Some(x1_alt) = cfg.x1_alt {
                let alt_seed = tagged_seed(seed, &format!("spine:x1={x1_alt}:{k}"));
                let (alt, resolved) = budgeted_spine(params, x1_alt, t, cfg, avg.std_error, alt_seed)?;
                let l2_alt = l2_report(&kept, alt.mean, m, cfg.normalization, pop_seed)?;
                let se = combined_se(l2.std_error, l2_alt.std_error);
                let outcome = if !resolved {
                    Status::Inconclusive
                } else if (l2_alt.mean - l2.mean).abs() < harness.sigmas * se + 1e-15 {
                    Status::Pass
                } else {
                    Status::Fail
                };
                status = status.combine(outcome);
                let alt_point = |q: &str| point(&[("quantity", &q), ("x1", &x1_alt), ("T", &dur)]);
                out.rows.push(CheckRow {
                    param_point: alt_point("spine_mean"),
                    t: Some(t),
                    estimate: alt.mean,
                    std_error: alt.std_error,
                    bound_or_target: Some(cfg.spine_se_ratio * avg.std_error),
                    outcome: if resolved { Status::Pass } else { Status::Inconclusive },
                    n: alt.n_replicas as u64,
                });
                out.rows.push(CheckRow {
                    param_point: alt_point("x1_independence"),
                    t: Some(t),
                    estimate: l2_alt.mean,
                    std_error: l2_alt.std_error,
                    bound_or_target: Some(l2.mean),
                    outcome,
                    n: l2_alt.n_replicas as u64,
                });
            }
        }
    }
    let (first, last) = (l2_points[0], l2_points[last_k]);
    let se = combined_se(first.std_error, last.std_error);
    let drop = first.value - last.value;
    let decrease = if drop > harness.sigmas * se { Status::Pass } else { Status::Inconclusive };
    let fit = DecayFit::fit(l2_points)?;
    let slope_status = match fit.slope {
        Some(s) if s < 0.0 => Status::Pass,
        Some(_) => Status::Fail,
        None => Status::Inconclusive,
    };
    // An error that grows beyond noise refutes the decay.
    let decrease = if -drop > harness.sigmas * se { Status::Fail } else { decrease };
    out.rows.push(CheckRow {
        param_point: point(&[("quantity", &"l2_drop"), ("x1", &cfg.x1), ("T", &dur)]),
        t: Some(last.t),
        estimate: drop,
        std_error: se,
        bound_or_target: Some(harness.sigmas * se),
        outcome: decrease,
        n: cfg.n,
    });
    out.rows.push(CheckRow {
        param_point: point(&[("quantity", &"l2_slope"), ("x1", &cfg.x1), ("T", &dur)]),
        t: None,
        estimate: fit.slope.unwrap_or(f64::NAN),
        std_error: fit.slope_se.unwrap_or(f64::NAN),
        bound_or_target: Some(0.0),
        outcome: slope_status,
        n: fit.used as u64,
    });
    out.fits.push(NamedFit { label: "l2_error".into(), fit });
    let mut out = out.settle();
    out.status = out.status.combine(status);
    let total = cfg.n as usize * cfg.t_grid.len();
    push_truncation(&mut out, harness, truncated, total);
    Ok(out)
}

fn l2_report(
    samples: &[(f64, f64)],
    target: f64,
    m: f64,
    normalization: LlnNormalization,
    seed: u64,
) -> Result<EstimatorReport> {
    let mut acc = Accumulator::default();
    for &(sum, count) in samples {
        let e = match normalization {
            LlnNormalization::Population => sum / count - target,
            LlnNormalization::MeanMass => (sum - count * target) / m,
        };
        acc.push(e * e);
    }
    report(&acc, "l2_error", seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EnvironmentProfile;

    #[test]
    fn mean_count_targets() {
        let h = Harness::default();
        let p = ModelParams::baseline();
        let o = check_mean_count(&p, &MeanCountConfig { t: 0.0, n: 100, ..Default::default() }, &h, 1).unwrap();
        assert_eq!(o.rows[0].estimate, 1.0);
        assert_eq!(o.status, Status::Pass);
        let o = check_mean_count(&p, &MeanCountConfig { x0: 2.0, t: 1.0, n: 4000, seed: None }, &h, 2).unwrap();
        assert!((o.rows[0].bound_or_target.unwrap() - (1.0 + 2.0 * (1f64.exp() - 1.0))).abs() < 1e-12);
        assert_eq!(o.status, Status::Pass, "{:?}", o.rows);
        assert!(check_mean_count(&p, &MeanCountConfig { n: 99, ..Default::default() }, &h, 1).is_err());
    }

    #[test]
    fn variance_ratio_at_time_zero() {
        let h = Harness::default();
        let p = ModelParams::baseline();
        let cfg = VarianceRatioConfig { x0: 2.0, t_grid: vec![0.0], n: 1000, seed: None };
        let o = check_variance_ratio(&p, &cfg, &h, 0).unwrap();
        assert_eq!(o.rows[0].estimate, 1.0);
        assert_eq!(o.rows[0].bound_or_target, Some(15.0));
    }

    #[test]
    fn growth_rate_limits() {
        let h = Harness::default();
        let cfg = GrowthRateConfig { n: 0, ..Default::default() };
        let o = estimate_growth_rate(&ModelParams::baseline(), &cfg, &h, 0).unwrap();
        assert_eq!(o.status, Status::Pass);
        assert!((o.rows.last().unwrap().estimate - 1.0).abs() < 1e-15);

        let small = GrowthRateConfig { x0_list: vec![0.01], n: 0, ..Default::default() };
        let o = estimate_growth_rate(&ModelParams::baseline(), &small, &h, 0).unwrap();
        let rates: Vec<f64> = o.rows.iter().map(|r| r.estimate).collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]) && rates.iter().all(|&r| r < 1.0));

        let fast = ModelParams::new(2.0, 0.25, EnvironmentProfile::constant(1.0)).unwrap();
        let long = GrowthRateConfig { t_grid: vec![10.0, 100.0], n: 0, ..Default::default() };
        let o = estimate_growth_rate(&fast, &long, &h, 0).unwrap();
        assert_eq!(o.rows.last().unwrap().bound_or_target, Some(2.0));
        assert_eq!(o.status, Status::Pass);
    }

    #[test]
    fn lln_with_constant_functional_is_exact() {
        let h = Harness::default();
        let cfg = LlnConfig {
            functional: NamedFunctional::ConstOne,
            t_grid: vec![0.1, 0.2, 0.3],
            n: 50,
            spine_pilot: 10,
            x1_alt: None,
            ..Default::default()
        };
        let o = check_lln(&ModelParams::baseline(), &cfg, &h, 4).unwrap();
        for r in o.rows.iter().filter(|r| r.param_point.starts_with("quantity=l2_error")) {
            assert_eq!(r.estimate, 0.0);
        }
        assert_eq!(o.status, Status::Inconclusive);
    }
}
