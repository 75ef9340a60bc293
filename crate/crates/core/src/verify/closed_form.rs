//! Checks of closed forms that need no population simulation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{point, CheckOutcome, CheckRow, Status};
use crate::error::{Error, Result};
use crate::model::{EnvironmentProfile, ModelParams};
use crate::rng::stream;
use crate::stats::ks_statistic;

/// Composite Simpson rule with step at most `step`.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, step: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut n = ((b - a) / step).ceil() as usize;
    n += n % 2;
    let n = n.max(2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// `(s, t)` pairs at which `φ(s,t)` is compared with its oracle.
    pub pairs: Vec<(f64, f64)>,
    pub alpha: f64,
    pub beta: f64,
    pub simpson_step: f64,
    /// Relative tolerance against the analytic constant-φ formula.
    pub constant_tolerance: f64,
    /// Relative tolerance against the Simpson oracle.
    pub simpson_tolerance: f64,
    pub seed: Option<u64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            pairs: vec![(0.0, 0.5), (0.0, 1.0), (0.3, 2.0), (1.0, 3.0), (2.0, 2.0), (0.0, 4.0)],
            alpha: 1.0,
            beta: 0.5,
            simpson_step: 1e-5,
            constant_tolerance: 1e-10,
            simpson_tolerance: 1e-8,
            seed: None,
        }
    }
}

/// Compares `phi_integral` for constant, sinusoidal and tabulated environments
/// (all at the model's growth rate) with independent oracles.
pub fn check_quadrature(params: &ModelParams, cfg: &QuadratureConfig, seed: u64) -> Result<CheckOutcome> {
    let a = params.a();
    let eps = params.epsilon();
    let b = match params.env() {
        EnvironmentProfile::Constant { b } => *b,
        _ => 1.0,
    };
    let constant = ModelParams::new(a, eps, EnvironmentProfile::constant(b))?;
    let sinus = ModelParams::new(a, eps, EnvironmentProfile::sinusoidal(cfg.alpha, cfg.beta))?;
    let knots: Vec<(f64, f64)> =
        (0..=16).map(|i| i as f64 * 0.25).map(|r| (r, cfg.alpha + cfg.beta * r.sin())).collect();
    let table = ModelParams::new(a, eps, EnvironmentProfile::tabulated(knots))?;

    let mut out = CheckOutcome::new("quadrature", 0, seed);
    let judge = |est: f64, oracle: f64, tol: f64| {
        if (est - oracle).abs() <= tol * oracle.abs() {
            Status::Pass
        } else {
            Status::Fail
        }
    };
    for &(s, t) in &cfg.pairs {
        // Analytic constant-φ value written with exp rather than expm1.
        let oracle = b * ((a * (t - s)).exp() - 1.0) / a;
        let est = constant.phi_integral(s, t)?;
        out.rows.push(CheckRow {
            param_point: point(&[("env", &"constant"), ("s", &s)]),
            t: Some(t),
            estimate: est,
            std_error: 0.0,
            bound_or_target: Some(oracle),
            outcome: judge(est, oracle, cfg.constant_tolerance),
            n: 0,
        });
        for (label, model) in [("sinusoidal", &sinus), ("tabulated", &table)] {
            let oracle = composite_simpson(|r| model.phi(r) * (a * (r - s)).exp(), s, t, cfg.simpson_step);
            let est = model.phi_integral(s, t)?;
            out.rows.push(CheckRow {
                param_point: point(&[("env", &label), ("s", &s)]),
                t: Some(t),
                estimate: est,
                std_error: 0.0,
                bound_or_target: Some(oracle),
                outcome: judge(est, oracle, cfg.simpson_tolerance),
                n: 0,
            });
        }
    }
    Ok(out.settle())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSamplerConfig {
    pub x: f64,
    pub s: f64,
    pub t: f64,
    pub n: u64,
    pub max_ks: f64,
    pub seed: Option<u64>,
}

impl Default for KernelSamplerConfig {
    fn default() -> Self {
        KernelSamplerConfig { x: 1.0, s: 0.0, t: 1.0, n: 100_000, max_ks: 0.01, seed: None }
    }
}

/// Kolmogorov–Smirnov distance between inverse-CDF draws of the spine kernel
/// and its CDF `((y − εx) + (q/2)(y² − ε²x²)) / ((1−2ε)x(1 + xq/2))`.
pub fn check_kernel_sampler(params: &ModelParams, cfg: &KernelSamplerConfig, seed: u64) -> Result<CheckOutcome> {
    if cfg.n < 2 {
        return Err(Error::invalid("kernel_sampler.n", "n ≥ 2"));
    }
    let mut rng = stream(seed, 0);
    let draws = (0..cfg.n)
        .map(|_| params.aux_kernel_sample(cfg.s, cfg.t, cfg.x, rng.random::<f64>()))
        .collect::<Result<Vec<f64>>>()?;
    let (x, eps) = (cfg.x, params.epsilon());
    let q = params.phi_integral(cfg.s, cfg.t)?;
    let lo = eps * x;
    let z = (1.0 - 2.0 * eps) * x * (1.0 + 0.5 * x * q);
    let cdf = |y: f64| (((y - lo) + 0.5 * q * (y * y - lo * lo)) / z).clamp(0.0, 1.0);
    let ks = ks_statistic(&draws, cdf);
    let mut out = CheckOutcome::new("kernel_sampler", cfg.n, seed);
    out.rows.push(CheckRow {
        param_point: point(&[("x", &cfg.x), ("s", &cfg.s), ("statistic", &"ks")]),
        t: Some(cfg.t),
        estimate: ks,
        std_error: 0.0,
        bound_or_target: Some(cfg.max_ks),
        outcome: if ks < cfg.max_ks { Status::Pass } else { Status::Fail },
        n: cfg.n,
    });
    Ok(out.settle())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenefitBoundConfig {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Offsets `r − t` at which the ratio is evaluated.
    pub offsets: Vec<f64>,
    pub seed: Option<u64>,
}

impl Default for BenefitBoundConfig {
    fn default() -> Self {
        BenefitBoundConfig {
            x_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0],
            y_grid: vec![0.0, 0.5, 1.0, 5.0],
            t_grid: vec![0.0, 0.5, 1.0, 3.0],
            offsets: vec![0.0, 0.1, 1.0, 5.0, 20.0],
            seed: None,
        }
    }
}

/// Evaluates `m(x,0,t)m(y,t,r)/m(x,0,r)` over the grids against its closed-form
/// bound, and `m` against its envelopes.
pub fn check_benefit_bound(params: &ModelParams, cfg: &BenefitBoundConfig, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("benefit_bound", 0, seed);
    let within = |v: f64, bound: f64| if v <= bound * (1.0 + 1e-12) { Status::Pass } else { Status::Fail };
    for &x in &cfg.x_grid {
        for &y in &cfg.y_grid {
            let bound = params.benefit_bound(x, y)?;
            let mut worst = 0.0_f64;
            for &t in &cfg.t_grid {
                for &off in &cfg.offsets {
                    let r = t + off;
                    let ratio =
                        params.mean_mass(x, 0.0, t)? * params.mean_mass(y, t, r)? / params.mean_mass(x, 0.0, r)?;
                    worst = worst.max(ratio);
                }
            }
            out.rows.push(CheckRow {
                param_point: point(&[("quantity", &"benefit_ratio"), ("x", &x), ("y", &y)]),
                t: None,
                estimate: worst,
                std_error: 0.0,
                bound_or_target: Some(bound),
                outcome: within(worst, bound),
                n: 0,
            });
        }
        // Worst relative violation of φ1·g ≤ φ(s,t) ≤ φ2·g.
        let mut worst = 1.0_f64;
        for &s in &cfg.t_grid {
            for &off in &cfg.offsets {
                let m = params.mean_mass(x, s, s + off)?;
                let (lo, hi) = params.mean_mass_envelope(x, s, s + off)?;
                worst = worst.max(m / hi).max(lo / m);
            }
        }
        out.rows.push(CheckRow {
            param_point: point(&[("quantity", &"mean_mass_envelope"), ("x", &x)]),
            t: None,
            estimate: worst,
            std_error: 0.0,
            bound_or_target: Some(1.0),
            outcome: within(worst, 1.0),
            n: 0,
        });
    }
    Ok(out.settle())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = composite_simpson(|x| x * x * x - x, 0.0, 2.0, 0.5);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_checks_pass_at_baseline() {
        let p = ModelParams::baseline();
        let q = check_quadrature(&p, &QuadratureConfig::default(), 1).unwrap();
        assert_eq!(q.status, Status::Pass, "{:?}", q.rows);
        let cfg = KernelSamplerConfig { n: 20_000, max_ks: 0.02, ..Default::default() };
        let k = check_kernel_sampler(&p, &cfg, 3).unwrap();
        assert_eq!(k.status, Status::Pass, "{:?}", k.rows);
        let b = check_benefit_bound(&p, &BenefitBoundConfig::default(), 0).unwrap();
        assert_eq!(b.status, Status::Pass, "{:?}", b.rows);
    }

    #[test]
    fn sampler_check_detects_a_wrong_law() {
        // Uniform draws on the support are far from the size-biased law when q is large.
        let p = ModelParams::baseline();
        let (x, t) = (3.0, 3.0);
        let q = p.phi_integral(0.0, t).unwrap();
        let lo = 0.25 * x;
        let z = 0.5 * x * (1.0 + 0.5 * x * q);
        let cdf = |y: f64| (((y - lo) + 0.5 * q * (y * y - lo * lo)) / z).clamp(0.0, 1.0);
        let uniform: Vec<f64> = (0..2000).map(|i| lo + 0.5 * x * (i as f64 + 0.5) / 2000.0).collect();
        assert!(ks_statistic(&uniform, cdf) > 0.05);
    }
}
