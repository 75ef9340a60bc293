//! Path windows and the functionals evaluated on them.
//!
//! A [`PathWindow`] is a piece of a piecewise-exponential trajectory over
//! `[origin, origin + duration]`: a starting value, exponential growth at rate
//! `a` between jumps, and the exact jump records inside the window. Grid
//! samples are computed on demand, so jump-counting functionals never depend
//! on the grid step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid resolution used when a functional asks for a sampled path.
pub const DEFAULT_GRID_STEPS: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct PathWindow<'a> {
    origin: f64,
    duration: f64,
    growth: f64,
    start_value: f64,
    /// `(absolute jump time, post-jump value)`, times in `(origin, origin + duration]`.
    jumps: &'a [(f64, f64)],
}

impl<'a> PathWindow<'a> {
    /// Builds a window; `jumps` must be sorted and lie in `(origin, origin + duration]`.
    pub fn new(origin: f64, duration: f64, growth: f64, start_value: f64, jumps: &'a [(f64, f64)]) -> Self {
        debug_assert!(jumps.windows(2).all(|w| w[0].0 <= w[1].0));
        debug_assert!(jumps.iter().all(|j| j.0 > origin && j.0 <= origin + duration));
        PathWindow { origin, duration, growth, start_value, jumps }
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start_value(&self) -> f64 {
        self.start_value
    }

    /// Value at relative time `s ∈ [0, duration]` (right-continuous).
    pub fn value_at(&self, s: f64) -> f64 {
        let abs = self.origin + s;
        let k = self.jumps.partition_point(|j| j.0 <= abs);
        let (t0, x0) = if k == 0 { (self.origin, self.start_value) } else { self.jumps[k - 1] };
        x0 * (self.growth * (abs - t0)).exp()
    }

    pub fn endpoint(&self) -> f64 {
        let (t0, x0) = self.jumps.last().copied().unwrap_or((self.origin, self.start_value));
        x0 * (self.growth * (self.origin + self.duration - t0)).exp()
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    /// Jump times relative to the window origin.
    pub fn jump_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(move |j| j.0 - self.origin)
    }

    pub fn jumps(&self) -> &'a [(f64, f64)] {
        self.jumps
    }

    /// Values on the uniform grid `0, δ, …, duration` with `δ = duration / steps`.
    pub fn grid(&self, steps: usize) -> Vec<f64> {
        let steps = steps.max(1);
        let dt = self.duration / steps as f64;
        (0..=steps).map(|i| self.value_at(i as f64 * dt)).collect()
    }

    pub fn default_grid(&self) -> Vec<f64> {
        self.grid(DEFAULT_GRID_STEPS)
    }
}

/// A real-valued functional of a path window.
pub trait PathFunctional: Sync {
    fn eval(&self, window: &PathWindow<'_>) -> f64;

    /// `‖F‖_∞` when known.
    fn sup_norm(&self) -> Option<f64> {
        None
    }
}

impl<F> PathFunctional for F
where
    F: Fn(&PathWindow<'_>) -> f64 + Sync,
{
    fn eval(&self, window: &PathWindow<'_>) -> f64 {
        self(window)
    }
}

/// The functionals selectable by name from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NamedFunctional {
    /// `F ≡ 1`.
    ConstOne,
    /// `1 / (1 + X_T)`.
    RecipOnePlusEndpoint,
    /// Number of jumps in the window, capped.
    CappedJumpCount(u32),
    /// `X_T^p`; unbounded unless `p = 0`.
    EndpointPower(i32),
}

impl PathFunctional for NamedFunctional {
    fn eval(&self, w: &PathWindow<'_>) -> f64 {
        match *self {
            NamedFunctional::ConstOne => 1.0,
            NamedFunctional::RecipOnePlusEndpoint => 1.0 / (1.0 + w.endpoint()),
            NamedFunctional::CappedJumpCount(cap) => (w.jump_count() as u32).min(cap) as f64,
            NamedFunctional::EndpointPower(p) => w.endpoint().powi(p),
        }
    }

    fn sup_norm(&self) -> Option<f64> {
        match *self {
            NamedFunctional::ConstOne | NamedFunctional::RecipOnePlusEndpoint => Some(1.0),
            NamedFunctional::CappedJumpCount(cap) => Some(cap as f64),
            NamedFunctional::EndpointPower(0) => Some(1.0),
            NamedFunctional::EndpointPower(_) => None,
        }
    }
}

impl NamedFunctional {
    pub const NAMES: [&'static str; 4] =
        ["const_one", "recip_one_plus_endpoint", "capped_jump_count(cap)", "endpoint_power(p)"];
}

impl fmt::Display for NamedFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedFunctional::ConstOne => write!(f, "const_one"),
            NamedFunctional::RecipOnePlusEndpoint => write!(f, "recip_one_plus_endpoint"),
            NamedFunctional::CappedJumpCount(c) => write!(f, "capped_jump_count({c})"),
            NamedFunctional::EndpointPower(p) => write!(f, "endpoint_power({p})"),
        }
    }
}

fn call_arg(s: &str, name: &str) -> Option<Option<String>> {
    if s == name {
        return Some(None);
    }
    let rest = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(Some(rest.trim().to_string()))
}

impl FromStr for NamedFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad =
            || Error::invalid("functional", format!("unknown functional `{s}`; expected one of {:?}", Self::NAMES));
        if s == "const_one" {
            return Ok(NamedFunctional::ConstOne);
        }
        if s == "recip_one_plus_endpoint" {
            return Ok(NamedFunctional::RecipOnePlusEndpoint);
        }
        if let Some(arg) = call_arg(s, "capped_jump_count") {
            let cap = match arg {
                None => 10,
                Some(a) => a.parse().map_err(|_| bad())?,
            };
            return Ok(NamedFunctional::CappedJumpCount(cap));
        }
        if let Some(Some(arg)) = call_arg(s, "endpoint_power") {
            return Ok(NamedFunctional::EndpointPower(arg.parse().map_err(|_| bad())?));
        }
        Err(bad())
    }
}

impl TryFrom<String> for NamedFunctional {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NamedFunctional> for String {
    fn from(f: NamedFunctional) -> Self {
        f.to_string()
    }
}
