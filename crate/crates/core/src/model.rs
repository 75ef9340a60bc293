//! Closed-form layer of the size-structured growth–fragmentation model.
//!
//! Cells grow exponentially at rate `a`, a cell of size `x` divides at time
//! `t` at rate `x·φ(t)`, and a division of a cell of size `x` produces two
//! cells of sizes `θx` and `(1−θ)x` with `θ` uniform on `[ε, 1−ε]`.
//!
//! Everything the simulators and checks need from the model lives here: the
//! environment integral, the first-moment semigroup `m`, the jump rate and
//! size kernel of the spine, the Lyapunov function `V(x) = x + 1/x` with its
//! drift constants, and the explicit moment, benefit and variance bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, ABS_TOL, MAX_SUBDIVISIONS};

/// Time-dependent factor `φ` of the division rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentProfile {
    /// `φ(t) = b`.
    Constant { b: f64 },
    /// `φ(t) = α + β sin t`, requires `α > |β|`.
    Sinusoidal { alpha: f64, beta: f64 },
    /// Continuous piecewise-linear interpolation of `(time, value)` pairs,
    /// held flat outside the tabulated range.
    Tabulated { points: Vec<(f64, f64)> },
}

impl EnvironmentProfile {
    pub fn constant(b: f64) -> Self {
        EnvironmentProfile::Constant { b }
    }

    pub fn sinusoidal(alpha: f64, beta: f64) -> Self {
        EnvironmentProfile::Sinusoidal { alpha, beta }
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Self {
        EnvironmentProfile::Tabulated { points }
    }

    fn validate(&self) -> Result<()> {
        match self {
            EnvironmentProfile::Constant { b } => {
                if !(b.is_finite() && *b > 0.0) {
                    return Err(Error::invalid("model.env.b", "b > 0 and finite"));
                }
            }
            EnvironmentProfile::Sinusoidal { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite()) {
                    return Err(Error::invalid("model.env", "α and β must be finite"));
                }
                if alpha - beta.abs() <= 0.0 {
                    return Err(Error::invalid("model.env", "α − |β| > 0"));
                }
            }
            EnvironmentProfile::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::invalid("model.env.points", "at least two (time, value) pairs"));
                }
                for &(t, v) in points {
                    if !(t.is_finite() && v.is_finite()) {
                        return Err(Error::invalid("model.env.points", "finite times and values"));
                    }
                    if v <= 0.0 {
                        return Err(Error::invalid("model.env.points", "values > 0"));
                    }
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    // Repeated times would encode a jump; φ must be continuous.
                    return Err(Error::invalid(
                        "model.env.points",
                        "times strictly increasing (step functions are not continuous)",
                    ));
                }
            }
        }
        Ok(())
    }

    /// `(φ1, φ2)`: the infimum and supremum of `φ` over `t ≥ 0`.
    fn bounds(&self) -> (f64, f64) {
        match self {
            EnvironmentProfile::Constant { b } => (*b, *b),
            EnvironmentProfile::Sinusoidal { alpha, beta } => (alpha - beta.abs(), alpha + beta.abs()),
            EnvironmentProfile::Tabulated { points } => {
                // Only the part of the table on t ≥ 0 matters, plus the
                // interpolated value at 0 when the table starts earlier.
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let v0 = self.value(0.0);
                lo = lo.min(v0);
                hi = hi.max(v0);
                for &(_, v) in points.iter().filter(|p| p.0 >= 0.0) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            }
        }
    }

    /// `φ(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            EnvironmentProfile::Constant { b } => *b,
            EnvironmentProfile::Sinusoidal { alpha, beta } => alpha + beta * t.sin(),
            EnvironmentProfile::Tabulated { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|p| p.0 <= t);
                let (t0, v0) = points[i - 1];
                let (t1, v1) = points[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, EnvironmentProfile::Constant { .. })
    }
}

/// Validated model parameters. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct ModelParams {
    a: f64,
    epsilon: f64,
    env: EnvironmentProfile,
    phi1: f64,
    phi2: f64,
}

/// Unvalidated form of [`ModelParams`], as it appears in config files.
/// Missing fields take their baseline values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub a: f64,
    pub epsilon: f64,
    pub env: EnvironmentProfile,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { a: 1.0, epsilon: 0.25, env: EnvironmentProfile::constant(1.0) }
    }
}

impl TryFrom<ModelSpec> for ModelParams {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        ModelParams::new(spec.a, spec.epsilon, spec.env)
    }
}

impl From<ModelParams> for ModelSpec {
    fn from(p: ModelParams) -> Self {
        ModelSpec { a: p.a, epsilon: p.epsilon, env: p.env }
    }
}

/// Derived constants of the drift inequality `A V ≤ −cV + d` for `V(x) = x + 1/x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConstants {
    /// Contraction rate, equal to the growth rate `a`.
    pub c: f64,
    pub d: f64,
    /// `C(ε) = [log((1−ε)/ε) − (1−2ε)] / (1−2ε)`.
    pub c_eps: f64,
}

impl ModelParams {
    pub fn new(a: f64, epsilon: f64, env: EnvironmentProfile) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid("model.a", "a > 0 and finite"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::invalid("model.epsilon", "ε ∈ (0, 1/2)"));
        }
        env.validate()?;
        let (phi1, phi2) = env.bounds();
        Ok(ModelParams { a, epsilon, env, phi1, phi2 })
    }

    /// `a = 1`, `ε = 1/4`, `φ ≡ 1`.
    pub fn baseline() -> Self {
        ModelParams::new(1.0, 0.25, EnvironmentProfile::constant(1.0)).expect("baseline parameters are valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn env(&self) -> &EnvironmentProfile {
        &self.env
    }

    /// Lower bound `φ1` of the environment.
    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    /// Upper bound `φ2` of the environment.
    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.env.value(t)
    }

    /// The division rate is linear in size (exponent 1), so the polynomial
    /// growth condition on `B` holds with `B(t,x) ≤ φ2·x`.
    pub fn division_rate_is_linear(&self) -> bool {
        let probe = [0.0, 0.5, 1.0, 7.0];
        probe.iter().all(|&x| {
            let t = 0.3;
            (self.division_rate(t, x) - x * self.phi(t)).abs() <= 1e-15 * (1.0 + x)
                && self.division_rate(t, x) <= self.phi2 * x + 1e-15
        })
    }

    /// `φ(s,t) = ∫_s^t φ(r) e^{a(r−s)} dr`.
    pub fn phi_integral(&self, s: f64, t: f64) -> Result<f64> {
        check_times(s, t)?;
        self.phi_integral_unchecked(s, t)
    }

    pub(crate) fn phi_integral_unchecked(&self, s: f64, t: f64) -> Result<f64> {
        let a = self.a;
        let dt = t - s;
        match &self.env {
            EnvironmentProfile::Constant { b } => Ok(b * (a * dt).exp_m1() / a),
            EnvironmentProfile::Sinusoidal { alpha, beta } => {
                // ∫ sin(r) e^{a(r−s)} dr = e^{a(r−s)} (a sin r − cos r) / (1 + a²)
                let growth = (a * dt).exp_m1();
                let sin_part = (growth + 1.0) * (a * t.sin() - t.cos()) - (a * s.sin() - s.cos());
                Ok(alpha * growth / a + beta * sin_part / (1.0 + a * a))
            }
            EnvironmentProfile::Tabulated { points } => {
                if dt == 0.0 {
                    return Ok(0.0);
                }
                // Integrate piece by piece so every panel sees a smooth integrand.
                let mut cuts = vec![s];
                cuts.extend(points.iter().map(|p| p.0).filter(|&r| r > s && r < t));
                cuts.push(t);
                let integrand = |r: f64| self.env.value(r) * (a * (r - s)).exp();
                let mut total = 0.0;
                for w in cuts.windows(2) {
                    let share = ABS_TOL * (w[1] - w[0]) / dt;
                    total += adaptive_simpson(integrand, w[0], w[1], share, MAX_SUBDIVISIONS)?;
                }
                Ok(total)
            }
        }
    }

    /// `m(x,s,t) = 1 + x·φ(s,t)`, the mean population size at `t` started
    /// from one individual of size `x` at time `s`.
    pub fn mean_mass(&self, x: f64, s: f64, t: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("size must be nonnegative, got {x}")));
        }
        Ok(1.0 + x * self.phi_integral(s, t)?)
    }

    /// `B(t,x) = x·φ(t)`.
    pub fn division_rate(&self, t: f64, x: f64) -> f64 {
        x * self.phi(t)
    }

    /// Spine jump rate `B̂_s^{(t)}(x) = 2xφ(s)·m(x/2,s,t)/m(x,s,t)`.
    pub fn aux_jump_rate(&self, s: f64, t: f64, x: f64) -> Result<f64> {
        check_times(s, t)?;
        if !(x >= 0.0) {
            return Err(Error::domain(format!("size must be nonnegative, got {x}")));
        }
        let q = self.phi_integral_unchecked(s, t)?;
        Ok(aux_rate_from_q(x, self.phi(s), q))
    }

    /// Density of the spine's post-jump size `y` given pre-jump size `x`.
    pub fn aux_kernel_density(&self, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
        check_times(s, t)?;
        if !(x > 0.0) {
            return Err(Error::domain(format!("pre-jump size must be positive, got {x}")));
        }
        let q = self.phi_integral_unchecked(s, t)?;
        Ok(AuxKernel::new(x, self.epsilon, q).density(y))
    }

    /// Inverse-CDF draw from the spine size kernel given a uniform variate `u`.
    pub fn aux_kernel_sample(&self, s: f64, t: f64, x: f64, u: f64) -> Result<f64> {
        check_times(s, t)?;
        if !(x > 0.0) {
            return Err(Error::domain(format!("pre-jump size must be positive, got {x}")));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("uniform variate must lie in [0,1], got {u}")));
        }
        let q = self.phi_integral_unchecked(s, t)?;
        Ok(AuxKernel::new(x, self.epsilon, q).sample(u))
    }

    /// Constants `c = a`, `d(ε) = 2φ2·C(ε) + 3a² / (φ1(1+2ε−2ε²))`.
    pub fn drift_constants(&self) -> DriftConstants {
        let eps = self.epsilon;
        let c_eps = (((1.0 - eps) / eps).ln() - (1.0 - 2.0 * eps)) / (1.0 - 2.0 * eps);
        let d = 2.0 * self.phi2 * c_eps + 3.0 * self.a * self.a / (self.phi1 * (1.0 + 2.0 * eps - 2.0 * eps * eps));
        DriftConstants { c: self.a, d, c_eps }
    }

    /// Right-hand side of the drift inequality, `−aV(x) + d(ε)`.
    pub fn drift_bound(&self, x: f64) -> Result<f64> {
        Ok(-self.a * lyapunov_v(x)? + self.drift_constants().d)
    }

    /// `e^{−as}V(x) + (d/a)(1 − e^{−as})`, the integrated form of the drift inequality.
    pub fn semigroup_drift_bound(&self, x: f64, s: f64) -> Result<f64> {
        let v = lyapunov_v(x)?;
        let d = self.drift_constants().d;
        let decay = (-self.a * s).exp();
        Ok(decay * v + d / self.a * (1.0 - decay))
    }

    /// Moment constant `C(ε,p) = (2ε/(1−2ε))·φ1·(1 − 2ε − ((1−ε)^{p+1} − ε^{p+1})/(p+1))`.
    pub fn moment_constant(&self, p: u32) -> f64 {
        let eps = self.epsilon;
        let pp = p as f64 + 1.0;
        let tail = ((1.0 - eps).powf(pp) - eps.powf(pp)) / pp;
        2.0 * eps / (1.0 - 2.0 * eps) * self.phi1 * (1.0 - 2.0 * eps - tail)
    }

    /// Cap on `E_x[(Y_s^{(t)})^p]` for a positive integer `p`:
    /// `max(x^p, (a·p / C(ε,p))^p)`.
    pub fn moment_cap(&self, p: u32, x0: f64) -> Result<f64> {
        if p == 0 {
            return Err(Error::domain("moment order must be a positive integer or −1"));
        }
        if !(x0 >= 0.0) {
            return Err(Error::domain(format!("size must be nonnegative, got {x0}")));
        }
        let pi = p as i32;
        let root = (self.a * p as f64 / self.moment_constant(p)).powi(pi);
        Ok(x0.powi(pi).max(root))
    }

    /// Grönwall curve bounding `E_x[1/Y_s^{(t)}]`:
    /// `(1/x − 2φ2C(ε)/a) e^{−as} + 2φ2C(ε)/a`.
    pub fn harmonic_moment_cap(&self, x0: f64, s: f64) -> Result<f64> {
        if !(x0 > 0.0) {
            return Err(Error::domain(format!("size must be positive, got {x0}")));
        }
        let level = 2.0 * self.phi2 * self.drift_constants().c_eps / self.a;
        Ok((1.0 / x0 - level) * (-self.a * s).exp() + level)
    }

    /// Upper bound on the benefit ratio `m(x,0,t)m(y,t,r)/m(x,0,r)` over `r ≥ t`:
    /// `(1 + xφ2/a)(1 + yφ2/a) / min(xφ1/a, 1)`.
    pub fn benefit_bound(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("x must be positive, got {x}")));
        }
        if !(y >= 0.0) {
            return Err(Error::domain(format!("y must be nonnegative, got {y}")));
        }
        let a = self.a;
        Ok((1.0 + x / a * self.phi2) * (1.0 + y / a * self.phi2) / (x / a * self.phi1).min(1.0))
    }

    /// Bound on `E[(N_t / m(x,0,t))²]`:
    /// `(a² + φ2x(a + 2φ2x) + φ2²x²) / min(a, φ1x)²`.
    pub fn variance_ratio_bound(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("x must be positive, got {x}")));
        }
        let a = self.a;
        let p2 = self.phi2;
        let num = a * a + p2 * x * (a + 2.0 * p2 * x) + p2 * p2 * x * x;
        let den = a.min(self.phi1 * x);
        Ok(num / (den * den))
    }

    /// Lower and upper envelopes of `m(x,s,t)` from `φ1 ≤ φ ≤ φ2`.
    pub fn mean_mass_envelope(&self, x: f64, s: f64, t: f64) -> Result<(f64, f64)> {
        check_times(s, t)?;
        let g = (self.a * (t - s)).exp_m1() / self.a;
        Ok((1.0 + x * self.phi1 * g, 1.0 + x * self.phi2 * g))
    }
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if !(s.is_finite() && t.is_finite()) {
        return Err(Error::domain(format!("times must be finite, got s={s}, t={t}")));
    }
    if s < 0.0 {
        return Err(Error::domain(format!("times must be nonnegative, got s={s}")));
    }
    if s > t {
        return Err(Error::domain(format!("require s ≤ t, got s={s}, t={t}")));
    }
    Ok(())
}

pub(crate) fn aux_rate_from_q(x: f64, phi_s: f64, q: f64) -> f64 {
    let xq = x * q;
    2.0 * x * phi_s * (1.0 + 0.5 * xq) / (1.0 + xq)
}

/// The spine's size kernel for a fixed pre-jump size `x` and `q = φ(s,t)`.
///
/// Its density on `[εx, (1−ε)x]` is proportional to `1 + yq`, so the CDF is
/// quadratic in `y` and inverts in closed form.
#[derive(Debug, Clone, Copy)]
pub struct AuxKernel {
    x: f64,
    eps: f64,
    q: f64,
}

impl AuxKernel {
    pub fn new(x: f64, eps: f64, q: f64) -> Self {
        AuxKernel { x, eps, q }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.eps * self.x, (1.0 - self.eps) * self.x)
    }

    fn normalizer(&self) -> f64 {
        (1.0 - 2.0 * self.eps) * self.x * (1.0 + 0.5 * self.x * self.q)
    }

    pub fn density(&self, y: f64) -> f64 {
        let (lo, hi) = self.support();
        if y < lo || y > hi {
            return 0.0;
        }
        (1.0 + y * self.q) / self.normalizer()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let (lo, hi) = self.support();
        if y <= lo {
            return 0.0;
        }
        if y >= hi {
            return 1.0;
        }
        ((y - lo) + 0.5 * self.q * (y * y - lo * lo)) / self.normalizer()
    }

    pub fn sample(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        // (q/2)y² + y − k = 0 with k = lo + (q/2)lo² + u·Z; the positive root
        // written as 2k / (1 + √(1 + 2qk)) stays exact as q → 0.
        let k = lo + 0.5 * self.q * lo * lo + u * self.normalizer();
        let y = 2.0 * k / (1.0 + (1.0 + 2.0 * self.q * k).sqrt());
        y.clamp(lo, hi)
    }
}

/// Lyapunov function `V(x) = x + 1/x`.
pub fn lyapunov_v(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("V is defined for x > 0, got {x}")));
    }
    Ok(x + 1.0 / x)
}

/// Endpoints `(x1(R), x2(R))` of the level set `{V < R}`; empty for `R ≤ 2`.
pub fn lyapunov_level_set(r: f64) -> Option<(f64, f64)> {
    if !(r > 2.0) {
        return None;
    }
    let disc = (r * r - 4.0).sqrt();
    // x1·x2 = 1, so compute the small root from the large one.
    let x2 = 0.5 * (r + disc);
    Some((1.0 / x2, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn sinus() -> ModelParams {
        ModelParams::new(1.0, 0.25, EnvironmentProfile::sinusoidal(1.0, 0.5)).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let env = EnvironmentProfile::constant(1.0);
        assert!(ModelParams::new(0.0, 0.25, env.clone()).is_err());
        let err = ModelParams::new(1.0, 0.6, env.clone()).unwrap_err();
        assert!(err.to_string().contains("ε ∈ (0, 1/2)"));
        assert!(ModelParams::new(1.0, 0.0, env).is_err());
        assert!(ModelParams::new(1.0, 0.2, EnvironmentProfile::sinusoidal(1.0, 1.0)).is_err());
        assert!(ModelParams::new(1.0, 0.2, EnvironmentProfile::tabulated(vec![(0.0, 1.0)])).is_err());
        let step = EnvironmentProfile::tabulated(vec![(0.0, 1.0), (1.0, 1.0), (1.0, 2.0)]);
        assert!(ModelParams::new(1.0, 0.2, step).is_err());
    }

    #[test]
    fn environment_bounds_come_from_the_variant() {
        let p = sinus();
        assert_eq!((p.phi1(), p.phi2()), (0.5, 1.5));
        let tab = ModelParams::new(1.0, 0.25, EnvironmentProfile::tabulated(vec![(0.0, 2.0), (1.0, 0.5), (3.0, 4.0)]))
            .unwrap();
        assert_eq!((tab.phi1(), tab.phi2()), (0.5, 4.0));
        assert!((tab.phi(0.5) - 1.25).abs() < 1e-15);
        assert_eq!(tab.phi(10.0), 4.0);
        assert!(ModelParams::baseline().division_rate_is_linear());
    }

    #[test]
    fn phi_integral_examples() {
        let p = ModelParams::baseline();
        assert_eq!(p.phi_integral(2.0, 2.0).unwrap(), 0.0);
        assert!((p.phi_integral(0.0, 1.0).unwrap() - (E - 1.0)).abs() < 1e-15);
        assert!(p.phi_integral(1.0, 0.5).is_err());
    }

    #[test]
    fn tabulated_matches_closed_forms() {
        // A flat table is the constant profile.
        let flat = ModelParams::new(1.0, 0.25, EnvironmentProfile::tabulated(vec![(0.0, 1.0), (5.0, 1.0)])).unwrap();
        let v = flat.phi_integral(0.0, 1.0).unwrap();
        assert!((v - (E - 1.0)).abs() < 1e-12);
        // Ramp φ(r) = r on [0,2]: ∫_0^2 r e^r dr = e² + 1.
        let ramp =
            ModelParams::new(1.0, 0.25, EnvironmentProfile::tabulated(vec![(0.0, 0.0001), (2.0, 2.0001)])).unwrap();
        let v = ramp.phi_integral(0.0, 2.0).unwrap();
        let exact = E * E + 1.0 + 0.0001 * (E * E - 1.0);
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn mean_mass_examples() {
        let p = ModelParams::baseline();
        assert_eq!(p.mean_mass(0.0, 0.3, 2.0).unwrap(), 1.0);
        assert!((p.mean_mass(1.0, 0.0, 1.0).unwrap() - E).abs() < 1e-14);
        assert!((p.mean_mass(1.0, 0.0, 1.5).unwrap() - 4.4816891).abs() < 1e-7);
        assert!(p.mean_mass(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn division_rate_examples() {
        let p = ModelParams::baseline();
        assert_eq!(p.division_rate(3.0, 0.0), 0.0);
        assert_eq!(p.division_rate(0.0, 2.0), 2.0);
        assert!((sinus().division_rate(FRAC_PI_2, 1.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn aux_jump_rate_examples() {
        let p = ModelParams::baseline();
        assert_eq!(p.aux_jump_rate(1.0, 1.0, 3.0).unwrap(), 6.0);
        let r = p.aux_jump_rate(0.0, 1.0, 1.0).unwrap();
        assert!((r - (E + 1.0) / E).abs() < 1e-14);
        assert!((r - 1.3678794).abs() < 1e-7);
        // Large x·q: the ratio tends to 1/2 so the rate approaches x·φ(s).
        let big = p.aux_jump_rate(0.0, 30.0, 1e3).unwrap();
        assert!((big / 1e3 - 1.0).abs() < 1e-10);
        assert!(p.aux_jump_rate(2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn aux_kernel_density_examples() {
        let p = ModelParams::baseline();
        assert_eq!(p.aux_kernel_density(0.0, 1.0, 1.0, 0.1).unwrap(), 0.0);
        assert_eq!(p.aux_kernel_density(0.0, 1.0, 1.0, 0.8).unwrap(), 0.0);
        assert!((p.aux_kernel_density(1.0, 1.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((p.aux_kernel_density(0.0, 1.0, 1.0, 0.5).unwrap() - 2.0).abs() < 1e-14);
        assert!(p.aux_kernel_density(0.0, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn aux_kernel_sample_endpoints() {
        let p = ModelParams::baseline();
        assert_eq!(p.aux_kernel_sample(0.0, 1.0, 1.0, 0.0).unwrap(), 0.25);
        assert!((p.aux_kernel_sample(0.0, 1.0, 1.0, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(p.aux_kernel_sample(1.0, 1.0, 1.0, 0.5).unwrap(), 0.5);
        assert!(p.aux_kernel_sample(0.0, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn aux_kernel_sample_matches_bisection() {
        let k = AuxKernel::new(1.0, 0.25, E - 1.0);
        let (mut lo, mut hi) = (0.25, 0.75);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if k.cdf(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((k.sample(0.5) - 0.5 * (lo + hi)).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_examples() {
        assert_eq!(lyapunov_v(1.0).unwrap(), 2.0);
        assert!(lyapunov_v(0.0).is_err());
        let dc = ModelParams::baseline().drift_constants();
        assert_eq!(dc.c, 1.0);
        assert!((dc.c_eps - 1.1972246).abs() < 1e-7);
        assert!((dc.c_eps - 2.0 * (3f64.ln() - 0.5)).abs() < 1e-15);
        assert!((dc.d - 4.5762674).abs() < 1e-7);
        let (x1, x2) = lyapunov_level_set(10.0).unwrap();
        assert!((x1 - 0.1010205).abs() < 1e-7);
        assert!((x2 - 9.8989795).abs() < 1e-7);
        assert!((lyapunov_v(x1).unwrap() - 10.0).abs() < 1e-12);
        assert!(lyapunov_level_set(2.0).is_none());
    }

    #[test]
    fn benefit_bound_examples() {
        let p = ModelParams::baseline();
        assert_eq!(p.benefit_bound(5.0, 0.0).unwrap(), 6.0);
        assert_eq!(p.benefit_bound(1.0, 1.0).unwrap(), 4.0);
        let ratio = p.mean_mass(1.0, 0.0, 1.0).unwrap() * p.mean_mass(1.0, 1.0, 2.0).unwrap()
            / p.mean_mass(1.0, 0.0, 2.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-14);
        assert!(p.benefit_bound(0.0, 1.0).is_err());
    }

    #[test]
    fn moment_and_variance_bounds() {
        let p = ModelParams::baseline();
        assert!((p.moment_constant(1) - 0.25).abs() < 1e-15);
        assert!((p.moment_cap(1, 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((p.moment_cap(1, 5.0).unwrap() - 5.0).abs() < 1e-12);
        let level = p.harmonic_moment_cap(1.0, 1e3).unwrap();
        assert!((level - 2.3944492).abs() < 1e-7);
        assert!((p.harmonic_moment_cap(1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.harmonic_moment_cap(1.0, 1.0).unwrap() - 1.8814).abs() < 1e-4);
        assert!((p.variance_ratio_bound(1.0).unwrap() - 5.0).abs() < 1e-15);
        assert!((p.variance_ratio_bound(2.0).unwrap() - 15.0).abs() < 1e-15);
    }
}
