//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Absolute tolerance used for every quadrature of the environment integral.
pub const ABS_TOL: f64 = 1e-12;

/// Maximum number of subdivisions before the integrator gives up.
pub const MAX_SUBDIVISIONS: usize = 1_000_000;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` with adaptive Simpson and Richardson correction.
///
/// The requested absolute tolerance is floored at a few ulps of the integral's
/// magnitude: with an `e^{ar}` weight the integrand can be large enough that
/// 1e-12 absolute is below double precision.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, max_subdivisions: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(lo);
    let fb = f(hi);
    let m = 0.5 * (lo + hi);
    let fm = f(m);
    let whole = simpson(lo, hi, fa, fm, fb);
    let tol = abs_tol.max(16.0 * f64::EPSILON * whole.abs());

    let mut stack = vec![Panel { a: lo, b: hi, fa, fm, fb, whole, tol }];
    let mut total = 0.0;
    let mut splits = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        // Stop on tolerance or when the panel can no longer be halved.
        if delta.abs() <= 15.0 * p.tol || m <= p.a || m >= p.b {
            total += left + right + delta / 15.0;
            continue;
        }
        splits += 1;
        if splits > max_subdivisions {
            return Err(Error::Numerical(format!(
                "adaptive Simpson exceeded {max_subdivisions} subdivisions on [{lo}, {hi}]"
            )));
        }
        let half = 0.5 * p.tol;
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol: half });
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol: half });
    }
    Ok(sign * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, ABS_TOL, MAX_SUBDIVISIONS).unwrap();
        assert!((v - 0.0).abs() < 1e-14);
    }

    #[test]
    fn exponential() {
        let v = adaptive_simpson(f64::exp, 0.0, 1.0, ABS_TOL, MAX_SUBDIVISIONS).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = adaptive_simpson(f64::sin, 1.0, 0.0, ABS_TOL, MAX_SUBDIVISIONS).unwrap();
        assert!((v + (1.0 - 1f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn subdivision_cap_is_reported() {
        let r = adaptive_simpson(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-15, 10);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
