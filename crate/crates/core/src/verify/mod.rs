//! Monte Carlo checks of the model's identities, inequalities and decay statements.
//!
//! Every check returns a [`CheckOutcome`] whose rows become one CSV file. A
//! check passes, fails, or is inconclusive; the last outcome is reserved for
//! runs whose noise is too large to decide (standard error above the admissible
//! fraction of the bound, too many truncated forests, unresolved decay).

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::popsim::ForestCaps;
use crate::stats::DecayFit;

mod closed_form;
mod population;
mod spine;

pub use closed_form::{
    check_benefit_bound, check_kernel_sampler, check_quadrature, composite_simpson, BenefitBoundConfig,
    KernelSamplerConfig, QuadratureConfig,
};
pub use population::{
    check_lln, check_many_to_one, check_mean_count, check_variance_ratio, estimate_growth_rate, GrowthRateConfig,
    LlnConfig, LlnNormalization, ManyToOneConfig, MeanCountConfig, VarianceRatioConfig,
};
pub use spine::{
    check_drift, check_martingale, check_moments, check_semigroup_drift, check_thinning, estimate_contraction,
    ContractionConfig, DriftConfig, MartingaleConfig, MomentsConfig, SemigroupDriftConfig, ThinningConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn all<I: IntoIterator<Item = Status>>(it: I) -> Status {
        it.into_iter().fold(Status::Pass, Status::combine)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        })
    }
}

/// One measured quantity of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub param_point: String,
    pub t: Option<f64>,
    pub estimate: f64,
    pub std_error: f64,
    pub bound_or_target: Option<f64>,
    pub outcome: Status,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: Status,
    pub rows: Vec<CheckRow>,
    /// Replica budget requested by the configuration.
    pub replicas: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<NamedFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub label: String,
    pub fit: DecayFit,
}

impl CheckOutcome {
    pub(crate) fn new(name: &str, replicas: u64, seed: u64) -> Self {
        CheckOutcome {
            name: name.to_string(),
            status: Status::Pass,
            rows: Vec::new(),
            replicas,
            seed,
            fits: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Sets the status to the combination of all row outcomes.
    pub(crate) fn settle(mut self) -> Self {
        self.status = Status::all(self.rows.iter().map(|r| r.outcome));
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn row(&self, param_point: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.param_point == param_point)
    }

    /// CSV body with the header `check_name,param_point,t,estimate,std_error,bound_or_target,outcome,n,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.name,
                csv_field(&r.param_point),
                opt(r.t),
                r.estimate,
                r.std_error,
                opt(r.bound_or_target),
                r.outcome,
                r.n,
                self.seed
            );
        }
        out
    }
}

pub const CSV_HEADER: &str = "check_name,param_point,t,estimate,std_error,bound_or_target,outcome,n,seed";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Acceptance settings shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Harness {
    /// Number of standard errors allowed between estimate and target.
    pub sigmas: f64,
    /// Largest admissible standard error as a fraction of the bound.
    pub max_se_fraction: f64,
    /// Largest admissible fraction of truncated forests.
    pub max_truncated_fraction: f64,
    pub max_individuals: usize,
}

impl Default for Harness {
    fn default() -> Self {
        Harness {
            sigmas: 3.0,
            max_se_fraction: 0.1,
            max_truncated_fraction: 0.01,
            max_individuals: ForestCaps::default().max_individuals,
        }
    }
}

impl Harness {
    pub fn caps(&self) -> ForestCaps {
        ForestCaps { max_individuals: self.max_individuals }
    }

    /// One-sided check `estimate ≤ bound` with slack `sigmas·se + extra`.
    /// The standard error must not exceed `max_se_fraction · scale`.
    pub fn upper(&self, estimate: f64, se: f64, bound: f64, extra: f64, scale: f64) -> Status {
        if !estimate.is_finite() || !se.is_finite() {
            return Status::Inconclusive;
        }
        if se > self.max_se_fraction * scale.abs() {
            return Status::Inconclusive;
        }
        let tol = 1e-12 * bound.abs().max(1.0);
        if estimate <= bound + self.sigmas * se + extra + tol {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Two-sided check `|estimate − target| ≤ sigmas·se`.
    pub fn equal(&self, estimate: f64, se: f64, target: f64) -> Status {
        if !estimate.is_finite() || !se.is_finite() {
            return Status::Inconclusive;
        }
        if se > self.max_se_fraction * target.abs().max(f64::MIN_POSITIVE) {
            return Status::Inconclusive;
        }
        let tol = 1e-12 * target.abs().max(1.0);
        if (estimate - target).abs() <= self.sigmas * se + tol {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Status implied by `truncated` of `total` forests.
    pub(crate) fn truncation(&self, truncated: usize, total: usize) -> Status {
        if total == 0 || truncated as f64 > self.max_truncated_fraction * total as f64 {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }
}

/// Names of all checks, in suite order.
pub const CHECK_NAMES: [&str; 14] = [
    "mean_count",
    "many_to_one",
    "kernel_sampler",
    "quadrature",
    "drift",
    "moments",
    "variance_ratio",
    "martingale",
    "lln",
    "contraction",
    "growth_rate",
    "semigroup_drift",
    "thinning",
    "benefit_bound",
];

/// `"k1=v1;k2=v2"` labels for the `param_point` column.
pub(crate) fn point(pairs: &[(&str, &dyn fmt::Display)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}
