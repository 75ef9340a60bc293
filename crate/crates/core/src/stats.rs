//! Monte Carlo summaries: estimator reports, KS distances and log-linear decay fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean, standard error and 95% normal confidence interval of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub label: String,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_replicas: usize,
    pub seed: u64,
}

impl EstimatorReport {
    /// Summarizes `samples` in order; the result depends only on the sample sequence.
    pub fn from_samples(label: impl Into<String>, seed: u64, samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Config(format!("an estimator needs at least 2 replicas, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let std_error = (ss / (n as f64 - 1.0) / n as f64).sqrt();
        Ok(EstimatorReport {
            label: label.into(),
            mean,
            std_error,
            ci_low: mean - Z95 * std_error,
            ci_high: mean + Z95 * std_error,
            n_replicas: n,
            seed,
        })
    }

    pub fn sample_std(&self) -> f64 {
        self.std_error * (self.n_replicas as f64).sqrt()
    }
}

/// Streaming mean and sum of squared deviations, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise update.
    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n as f64 - 1.0)).max(0.0)
        }
    }

    pub fn report(&self, label: impl Into<String>, seed: u64) -> Result<EstimatorReport> {
        if self.n < 2 {
            return Err(Error::Config(format!("an estimator needs at least 2 replicas, got {}", self.n)));
        }
        let std_error = (self.variance() / self.n as f64).sqrt();
        Ok(EstimatorReport {
            label: label.into(),
            mean: self.mean,
            std_error,
            ci_low: self.mean - Z95 * std_error,
            ci_high: self.mean + Z95 * std_error,
            n_replicas: self.n,
            seed,
        })
    }
}

/// `√(a² + b²)`, the standard error of a difference of independent estimates.
pub fn combined_se(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    pub value: f64,
    pub std_error: f64,
}

/// Log-linear fit `log v(t) ≈ c + slope·t` over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub points: Vec<DecayPoint>,
    /// Number of points that entered the fit.
    pub used: usize,
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    pub slope_ci: Option<(f64, f64)>,
}

impl DecayFit {
    /// Fits the points whose value is positive and resolved (more than two
    /// standard errors from zero). Points are weighted by the inverse
    /// delta-method variance of `log v`, `(v / se)²`; when some point has no
    /// sampling error the fit is unweighted with a residual-based slope error.
    pub fn fit(points: Vec<DecayPoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::domain("decay grid times must be strictly increasing"));
        }
        let used: Vec<&DecayPoint> = points.iter().filter(|p| p.value > 0.0 && p.value > 2.0 * p.std_error).collect();
        let k = used.len();
        if k < 2 {
            return Ok(DecayFit { points, used: k, slope: None, slope_se: None, slope_ci: None });
        }
        let weighted = used.iter().all(|p| p.std_error > 0.0);
        let w: Vec<f64> = used.iter().map(|p| if weighted { (p.value / p.std_error).powi(2) } else { 1.0 }).collect();
        let sw: f64 = w.iter().sum();
        let tbar = used.iter().zip(&w).map(|(p, w)| w * p.t).sum::<f64>() / sw;
        let ybar = used.iter().zip(&w).map(|(p, w)| w * p.value.ln()).sum::<f64>() / sw;
        let sxx: f64 = used.iter().zip(&w).map(|(p, w)| w * (p.t - tbar).powi(2)).sum();
        let sxy: f64 = used.iter().zip(&w).map(|(p, w)| w * (p.t - tbar) * (p.value.ln() - ybar)).sum();
        let slope = sxy / sxx;
        let slope_se = if weighted {
            (1.0 / sxx).sqrt()
        } else if k > 2 {
            let rss: f64 = used.iter().map(|p| (p.value.ln() - ybar - slope * (p.t - tbar)).powi(2)).sum();
            (rss / (k as f64 - 2.0) / sxx).sqrt()
        } else {
            0.0
        };
        Ok(DecayFit {
            points,
            used: k,
            slope: Some(slope),
            slope_se: Some(slope_se),
            slope_ci: Some((slope - Z95 * slope_se, slope + Z95 * slope_se)),
        })
    }
}
