//! The spine: the time-inhomogeneous auxiliary process `Y^{(t)}`.
//!
//! Between jumps `Y` grows like `x·e^{a·elapsed}`; it jumps at rate
//! `B̂_s^{(t)}(x) = 2xφ(s)·m(x/2,s,t)/m(x,s,t)` to a size drawn from the
//! size-biased kernel [`AuxKernel`]. Jump times are produced by thinning the
//! inhomogeneous Poisson process of intensity `2x_u φ2`, which dominates
//! `B̂` along the flow and whose integrated intensity inverts in closed form.
//!
//! The module also simulates the unweighted comparison process (jump rate
//! `2B`, uniform kernel) together with the Feynman–Kac weight that turns its
//! law into the spine's.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::functional::{PathFunctional, PathWindow};
use crate::mc;
use crate::model::{aux_rate_from_q, AuxKernel, ModelParams};
use crate::rng::{stream, SimRng};
use crate::stats::EstimatorReport;

/// Width of the look-ahead window after which the thinning bound is refreshed.
pub const DEFAULT_THINNING_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineOptions {
    pub thinning_window: f64,
}

impl Default for SpineOptions {
    fn default() -> Self {
        SpineOptions { thinning_window: DEFAULT_THINNING_WINDOW }
    }
}

/// One realization of a piecewise-exponential jump path on `[start_time, terminal_time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinePath {
    pub start_time: f64,
    pub terminal_time: f64,
    pub start_size: f64,
    pub growth: f64,
    /// `(jump time, post-jump size)`, strictly increasing in time.
    pub jumps: Vec<(f64, f64)>,
    pub seed: u64,
}

impl SpinePath {
    /// Value at time `u` (right-continuous).
    pub fn value_at(&self, u: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.0 <= u);
        let (t0, x0) = if k == 0 { (self.start_time, self.start_size) } else { self.jumps[k - 1] };
        x0 * (self.growth * (u - t0)).exp()
    }

    pub fn endpoint(&self) -> f64 {
        self.value_at(self.terminal_time)
    }

    /// Pre-jump value at time `u` (left limit).
    pub fn value_before(&self, u: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.0 < u);
        let (t0, x0) = if k == 0 { (self.start_time, self.start_size) } else { self.jumps[k - 1] };
        x0 * (self.growth * (u - t0)).exp()
    }

    /// The path restricted to `[from, from + duration]`.
    pub fn window(&self, from: f64, duration: f64) -> Result<PathWindow<'_>> {
        if !(from >= self.start_time && from + duration <= self.terminal_time + 1e-12 && duration >= 0.0) {
            return Err(Error::domain(format!(
                "window [{from}, {}] outside path range [{}, {}]",
                from + duration,
                self.start_time,
                self.terminal_time
            )));
        }
        let lo = self.jumps.partition_point(|j| j.0 <= from);
        let hi = self.jumps.partition_point(|j| j.0 <= from + duration);
        Ok(PathWindow::new(from, duration, self.growth, self.value_at(from), &self.jumps[lo..hi]))
    }
}

/// A path of the comparison process together with its Feynman–Kac weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPath {
    pub path: SpinePath,
    pub weight: f64,
}

/// Simulates the spine with terminal time `t`, started at size `x0` at time 0.
pub fn simulate_spine(params: &ModelParams, x0: f64, t: f64, seed: u64) -> Result<SpinePath> {
    let mut rng = stream(seed, 0);
    let mut path = simulate_spine_from(params, 0.0, x0, t, &mut rng, SpineOptions::default())?;
    path.seed = seed;
    Ok(path)
}

/// Simulates the spine with terminal time `t` on `[s0, t]` from `Y_{s0} = x0`.
pub fn simulate_spine_from(
    params: &ModelParams,
    s0: f64,
    x0: f64,
    t: f64,
    rng: &mut SimRng,
    opts: SpineOptions,
) -> Result<SpinePath> {
    simulate_spine_traced(params, s0, x0, t, rng, opts, |_, _| {})
}

/// As [`simulate_spine_from`], reporting `(proposal time, acceptance probability)`
/// for every thinning proposal.
pub(crate) fn simulate_spine_traced<G: FnMut(f64, f64)>(
    params: &ModelParams,
    s0: f64,
    x0: f64,
    t: f64,
    rng: &mut SimRng,
    opts: SpineOptions,
    on_proposal: G,
) -> Result<SpinePath> {
    let mut jumps = Vec::new();
    advance_spine(params, s0, x0, t, t, rng, opts, on_proposal, |u, y| jumps.push((u, y)))?;
    Ok(SpinePath { start_time: s0, terminal_time: t, start_size: x0, growth: params.a(), jumps, seed: 0 })
}

/// `Y_until` for the spine with terminal time `t` started from `Y_{s0} = x0`,
/// without recording the path.
pub fn spine_value_at(params: &ModelParams, s0: f64, x0: f64, until: f64, t: f64, rng: &mut SimRng) -> Result<f64> {
    advance_spine(params, s0, x0, until, t, rng, SpineOptions::default(), |_, _| {}, |_, _| {})
}

/// Thinning loop on `[s0, until]` for the spine with terminal time `t ≥ until`.
#[allow(clippy::too_many_arguments)]
fn advance_spine<G: FnMut(f64, f64), J: FnMut(f64, f64)>(
    params: &ModelParams,
    s0: f64,
    x0: f64,
    until: f64,
    t: f64,
    rng: &mut SimRng,
    opts: SpineOptions,
    mut on_proposal: G,
    mut on_jump: J,
) -> Result<f64> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::domain(format!("spine start size must be positive, got {x0}")));
    }
    if !(s0 >= 0.0 && s0 <= until && until <= t && t.is_finite()) {
        return Err(Error::domain(format!("spine needs 0 ≤ s0 ≤ until ≤ t, got s0={s0}, until={until}, t={t}")));
    }
    if !(opts.thinning_window > 0.0) {
        return Err(Error::invalid("thinning_window", "thinning_window > 0"));
    }
    let a = params.a();
    let phi2 = params.phi2();
    let eps = params.epsilon();
    let mut s = s0;
    let mut x = x0;
    while s < until {
        let window_end = (s + opts.thinning_window).min(until);
        // Proposal intensity 2·x·e^{a(u−s)}·φ2 has integral (2xφ2/a)(e^{a(u−s)} − 1).
        let e: f64 = rng.sample(Exp1);
        let dt = (a * e / (2.0 * x * phi2)).ln_1p() / a;
        let u = s + dt;
        if u >= window_end {
            x *= (a * (window_end - s)).exp();
            s = window_end;
            continue;
        }
        let xu = x * (a * dt).exp();
        let q = params.phi_integral_unchecked(u, t)?;
        let accept = aux_rate_from_q(xu, params.phi(u), q) / (2.0 * xu * phi2);
        on_proposal(u, accept);
        s = u;
        x = xu;
        if rng.random::<f64>() < accept {
            x = AuxKernel::new(xu, eps, q).sample(rng.random::<f64>());
            on_jump(u, x);
        }
    }
    Ok(x)
}

/// Spine path of replica `index` for a run seeded with `seed`.
pub fn replica_spine(params: &ModelParams, s0: f64, x0: f64, t: f64, seed: u64, index: u64) -> Result<SpinePath> {
    let mut rng = stream(seed, index);
    let mut path = simulate_spine_from(params, s0, x0, t, &mut rng, SpineOptions::default())?;
    path.seed = seed;
    Ok(path)
}

/// Estimates `E[F(Y^{(t+T)}_{t+s}, s ≤ T) | Y_0 = x1]` from `replicas` spine paths.
pub fn spine_expectation<F: PathFunctional + ?Sized>(
    params: &ModelParams,
    x1: f64,
    t: f64,
    duration: f64,
    f: &F,
    replicas: u64,
    seed: u64,
) -> Result<EstimatorReport> {
    if replicas < 2 {
        return Err(Error::Config(format!("spine_expectation needs at least 2 replicas, got {replicas}")));
    }
    if !(t >= 0.0 && duration >= 0.0) {
        return Err(Error::domain(format!("need t ≥ 0 and T ≥ 0, got t={t}, T={duration}")));
    }
    let [acc] = mc::accumulate(replicas, |i| {
        let path = replica_spine(params, 0.0, x1, t + duration, seed, i)?;
        Ok([f.eval(&path.window(t, duration)?)])
    })?;
    acc.report(format!("spine E[F] x1={x1} t={t} T={duration}"), seed)
}

/// Simulates the comparison process (flow `a`, jump rate `2xφ`, uniform
/// kernel) on `[r, s]` from `x0` and returns it with the weight
/// `e^{∫_r^s B(X_v)dv}·m(X_s,s,t)/m(x0,r,t)`, whose mean is 1.
///
/// Only constant environments are supported.
pub fn martingale_weight_run(params: &ModelParams, x0: f64, r: f64, s: f64, t: f64, seed: u64) -> Result<WeightedPath> {
    let mut rng = stream(seed, 0);
    martingale_weight_with(params, x0, r, s, t, &mut rng, seed)
}

pub(crate) fn martingale_weight_with(
    params: &ModelParams,
    x0: f64,
    r: f64,
    s: f64,
    t: f64,
    rng: &mut SimRng,
    seed: u64,
) -> Result<WeightedPath> {
    if !params.env().is_constant() {
        return Err(Error::Unsupported("the Feynman–Kac weight is implemented for constant φ only".into()));
    }
    if !(x0 > 0.0) {
        return Err(Error::domain(format!("start size must be positive, got {x0}")));
    }
    if !(r >= 0.0 && r <= s && s <= t) {
        return Err(Error::domain(format!("need 0 ≤ r ≤ s ≤ t, got r={r}, s={s}, t={t}")));
    }
    let a = params.a();
    let b = params.phi1();
    let eps = params.epsilon();
    let mut jumps = Vec::new();
    let mut integral = 0.0;
    let mut u = r;
    let mut x = x0;
    while u < s {
        // Hazard of the comparison process: 2·x·e^{a(v−u)}·b.
        let e: f64 = rng.sample(Exp1);
        let dt = (a * e / (2.0 * x * b)).ln_1p() / a;
        if u + dt >= s {
            integral += x * b * (a * (s - u)).exp_m1() / a;
            x *= (a * (s - u)).exp();
            break;
        }
        // ∫ B over the segment is half the consumed hazard.
        integral += 0.5 * e;
        let pre = x * (a * dt).exp();
        u += dt;
        x = pre * (eps + (1.0 - 2.0 * eps) * rng.random::<f64>());
        jumps.push((u, x));
    }
    let weight = integral.exp() * params.mean_mass(x, s, t)? / params.mean_mass(x0, r, t)?;
    let path = SpinePath { start_time: r, terminal_time: s, start_size: x0, growth: a, jumps, seed };
    Ok(WeightedPath { path, weight })
}

/// Writes paths in the delimited spine dump format.
///
/// ```text
/// # spine-dump v1
/// # path=<i> seed=<seed> start_time=<s0> start_size=<x0> terminal_time=<t>
/// path<TAB>jump_time<TAB>size
/// <i><TAB><jump time><TAB><post-jump size>
/// ```
pub fn write_spine_dump(paths: &[SpinePath]) -> String {
    let mut out = String::from("# spine-dump v1\npath\tjump_time\tsize\n");
    for (i, p) in paths.iter().enumerate() {
        let _ = writeln!(
            out,
            "# path={i} seed={} start_time={} start_size={} terminal_time={}",
            p.seed, p.start_time, p.start_size, p.terminal_time
        );
        for (jt, y) in &p.jumps {
            let _ = writeln!(out, "{i}\t{jt}\t{y}");
        }
    }
    out
}

/// Parses the output of [`write_spine_dump`]; `growth` is not part of the format.
pub fn read_spine_dump(text: &str, growth: f64) -> Result<Vec<SpinePath>> {
    let mut lines = text.lines();
    if lines.next() != Some("# spine-dump v1") {
        return Err(Error::Parse("missing `# spine-dump v1` header".into()));
    }
    if lines.next() != Some("path\tjump_time\tsize") {
        return Err(Error::Parse("missing column header".into()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
    let mut paths: Vec<SpinePath> = Vec::new();
    for line in lines {
        if let Some(meta) = line.strip_prefix("# ") {
            let mut path =
                SpinePath { start_time: 0.0, terminal_time: 0.0, start_size: 0.0, growth, jumps: Vec::new(), seed: 0 };
            for kv in meta.split_whitespace() {
                let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad field `{kv}`")))?;
                match k {
                    "path" => {}
                    "seed" => path.seed = v.parse().map_err(|_| Error::Parse(format!("bad seed `{v}`")))?,
                    "start_time" => path.start_time = num(v)?,
                    "start_size" => path.start_size = num(v)?,
                    "terminal_time" => path.terminal_time = num(v)?,
                    _ => return Err(Error::Parse(format!("unknown field `{k}`"))),
                }
            }
            paths.push(path);
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("expected 3 columns, got `{line}`")));
        }
        let idx: usize = cols[0].parse().map_err(|_| Error::Parse(format!("bad path index `{}`", cols[0])))?;
        let last = paths.len().checked_sub(1);
        let path = paths
            .get_mut(idx)
            .filter(|_| Some(idx) == last)
            .ok_or_else(|| Error::Parse(format!("record for path {idx} outside its block")))?;
        path.jumps.push((num(cols[1])?, num(cols[2])?));
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::NamedFunctional;
    use crate::model::EnvironmentProfile;

    #[test]
    fn zero_horizon_has_no_jumps() {
        let p = simulate_spine(&ModelParams::baseline(), 1.3, 0.0, 1).unwrap();
        assert!(p.jumps.is_empty());
        assert_eq!(p.endpoint(), 1.3);
    }

    #[test]
    fn path_invariants() {
        let params = ModelParams::new(1.0, 0.2, EnvironmentProfile::sinusoidal(1.0, 0.6)).unwrap();
        for seed in 0..200 {
            let p = simulate_spine(&params, 0.7, 3.0, seed).unwrap();
            let mut last = 0.0;
            for &(jt, y) in &p.jumps {
                assert!(jt > last && jt <= 3.0);
                let pre = p.value_before(jt);
                assert!(y >= 0.2 * pre * (1.0 - 1e-12) && y <= 0.8 * pre * (1.0 + 1e-12));
                last = jt;
            }
        }
    }

    #[test]
    fn acceptance_ratio_is_sandwiched() {
        let params = ModelParams::new(1.0, 0.25, EnvironmentProfile::sinusoidal(1.0, 0.5)).unwrap();
        let mut rng = stream(4, 0);
        let mut seen = 0;
        for _ in 0..100 {
            simulate_spine_traced(&params, 0.0, 1.0, 4.0, &mut rng, SpineOptions::default(), |u, acc| {
                let ratio = params.phi(u) / params.phi2();
                assert!(acc >= 0.5 * ratio - 1e-12 && acc <= ratio + 1e-12);
                assert!(acc > 0.0 && acc <= 1.0);
                seen += 1;
            })
            .unwrap();
        }
        assert!(seen > 100);
    }

    #[test]
    fn window_extraction_counts_jumps_exactly() {
        let params = ModelParams::baseline();
        let f = NamedFunctional::CappedJumpCount(u32::MAX);
        for seed in 0..100 {
            let p = simulate_spine(&params, 1.0, 2.0, seed).unwrap();
            let w = p.window(1.0, 0.7).unwrap();
            let direct = p.jumps.iter().filter(|j| j.0 > 1.0 && j.0 <= 1.7).count();
            assert_eq!(f.eval(&w) as usize, direct);
            assert!((w.endpoint() - p.value_at(1.7)).abs() <= 1e-12 * w.endpoint());
            assert!((w.start_value() - p.value_at(1.0)).abs() <= 1e-12 * w.start_value());
        }
    }

    #[test]
    fn partial_advance_matches_full_path() {
        let params = ModelParams::baseline();
        for i in 0..50 {
            let full = replica_spine(&params, 0.0, 1.0, 0.8, 17, i).unwrap();
            let mut rng = stream(17, i);
            let part = spine_value_at(&params, 0.0, 1.0, 0.8, 0.8, &mut rng).unwrap();
            assert!((part - full.endpoint()).abs() <= 1e-12 * part);
        }
    }

    #[test]
    fn const_one_has_zero_error() {
        let r = spine_expectation(&ModelParams::baseline(), 1.0, 0.5, 0.5, &NamedFunctional::ConstOne, 100, 3).unwrap();
        assert_eq!((r.mean, r.std_error), (1.0, 0.0));
        assert!(spine_expectation(&ModelParams::baseline(), 1.0, 0.5, 0.5, &NamedFunctional::ConstOne, 0, 3).is_err());
    }

    #[test]
    fn martingale_edge_cases() {
        let p = ModelParams::baseline();
        let w = martingale_weight_run(&p, 1.0, 0.3, 0.3, 1.0, 2).unwrap();
        assert_eq!(w.weight, 1.0);
        for seed in 0..50 {
            assert!(martingale_weight_run(&p, 1.0, 0.0, 0.5, 1.0, seed).unwrap().weight > 0.0);
        }
        let sin = ModelParams::new(1.0, 0.25, EnvironmentProfile::sinusoidal(1.0, 0.5)).unwrap();
        assert!(matches!(martingale_weight_run(&sin, 1.0, 0.0, 0.5, 1.0, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dump_round_trip() {
        let params = ModelParams::baseline();
        let paths: Vec<SpinePath> = (0..5).map(|s| simulate_spine(&params, 1.0, 1.5, s).unwrap()).collect();
        let text = write_spine_dump(&paths);
        assert_eq!(read_spine_dump(&text, 1.0).unwrap(), paths);
        let empty = write_spine_dump(&[simulate_spine(&params, 1.0, 0.0, 9).unwrap()]);
        assert_eq!(empty.lines().filter(|l| !l.starts_with('#')).count(), 1);
    }
}
