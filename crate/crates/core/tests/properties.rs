use proptest::prelude::*;

use spinebranch::model::{AuxKernel, EnvironmentProfile, ModelParams};
use spinebranch::popsim::{simulate_forest, ForestCaps, Label};
use spinebranch::stats::{DecayFit, DecayPoint, EstimatorReport};

/// Composite Simpson with `n` (even) panels; independent of the crate's quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn env_strategy() -> impl Strategy<Value = EnvironmentProfile> {
    prop_oneof![
        (0.1f64..3.0).prop_map(EnvironmentProfile::constant),
        (0.5f64..2.0, 0.0f64..0.95).prop_map(|(alpha, frac)| EnvironmentProfile::sinusoidal(alpha, alpha * frac)),
        prop::collection::vec(0.2f64..2.0, 2..6).prop_map(|vals| {
            EnvironmentProfile::tabulated(vals.iter().enumerate().map(|(i, &v)| (i as f64 * 0.7, v)).collect())
        }),
    ]
}

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.2f64..2.0, 0.01f64..0.49, env_strategy()).prop_map(|(a, eps, env)| ModelParams::new(a, eps, env).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_density_integrates_to_one(p in params_strategy(), x in 0.05f64..8.0, s in 0.0f64..2.0, dt in 0.0f64..3.0) {
        let t = s + dt;
        let eps = p.epsilon();
        let mass = simpson(|y| p.aux_kernel_density(s, t, x, y).unwrap(), eps * x, (1.0 - eps) * x, 200);
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
        prop_assert_eq!(p.aux_kernel_density(s, t, x, 0.99 * eps * x).unwrap(), 0.0);
    }

    #[test]
    fn mean_mass_averaged_over_fragmentation_is_half_size(p in params_strategy(), x in 0.05f64..8.0, s in 0.0f64..2.0, dt in 0.0f64..3.0) {
        // ∫ m(y, s, t) Q(x, dy) = m(x/2, s, t) for the uniform split on [εx, (1−ε)x].
        let t = s + dt;
        let eps = p.epsilon();
        let (lo, hi) = (eps * x, (1.0 - eps) * x);
        let avg = simpson(|y| p.mean_mass(y, s, t).unwrap(), lo, hi, 20) / (hi - lo);
        let half = p.mean_mass(x / 2.0, s, t).unwrap();
        prop_assert!((avg - half).abs() <= 1e-12 * half, "{avg} vs {half}");
    }

    #[test]
    fn spine_rate_sandwich(p in params_strategy(), x in 0.0f64..20.0, s in 0.0f64..3.0, dt in 0.0f64..5.0) {
        let t = s + dt;
        let rate = p.aux_jump_rate(s, t, x).unwrap();
        let b = p.division_rate(s, x);
        prop_assert!(rate >= b * (1.0 - 1e-12) && rate <= 2.0 * b * (1.0 + 1e-12));
        // At s = t the spine divides at twice the population rate.
        let at_end = p.aux_jump_rate(t, t, x).unwrap();
        prop_assert!((at_end - 2.0 * p.division_rate(t, x)).abs() <= 1e-12 * (1.0 + at_end));
    }

    #[test]
    fn mean_mass_within_envelope(p in params_strategy(), x in 0.0f64..10.0, s in 0.0f64..3.0, dt in 0.0f64..4.0) {
        let t = s + dt;
        let m = p.mean_mass(x, s, t).unwrap();
        let (lo, hi) = p.mean_mass_envelope(x, s, t).unwrap();
        prop_assert!(lo <= m * (1.0 + 1e-10) && m <= hi * (1.0 + 1e-10));
        prop_assert!(m >= 1.0);
    }

    #[test]
    fn phi_integral_chain_rule(p in params_strategy(), s in 0.0f64..2.0, d1 in 0.0f64..2.0, d2 in 0.0f64..2.0) {
        let (u, t) = (s + d1, s + d1 + d2);
        let whole = p.phi_integral(s, t).unwrap();
        let split = p.phi_integral(s, u).unwrap() + (p.a() * (u - s)).exp() * p.phi_integral(u, t).unwrap();
        prop_assert!((whole - split).abs() <= 1e-10 * whole.abs().max(1e-300), "{whole} vs {split}");
    }

    #[test]
    fn phi_integral_matches_simpson(p in params_strategy(), s in 0.0f64..2.0, dt in 0.0f64..2.0) {
        let t = s + dt;
        // Split at tabulation knots so the oracle sees smooth pieces.
        let mut cuts = vec![s];
        if let EnvironmentProfile::Tabulated { points } = p.env() {
            cuts.extend(points.iter().map(|q| q.0).filter(|&r| r > s && r < t));
        }
        cuts.push(t);
        let a = p.a();
        let oracle: f64 = cuts.windows(2).map(|w| simpson(|r| p.phi(r) * (a * (r - s)).exp(), w[0], w[1], 2000)).sum();
        let v = p.phi_integral(s, t).unwrap();
        prop_assert!((v - oracle).abs() <= 1e-9 * oracle.max(1e-12), "{v} vs {oracle}");
    }

    #[test]
    fn monotonicity(p in params_strategy(), x in 0.0f64..5.0, dx in 0.0f64..5.0, s in 0.0f64..2.0, dt in 0.0f64..2.0, dt2 in 0.0f64..2.0) {
        let t = s + dt;
        prop_assert!(p.phi_integral(s, t + dt2).unwrap() >= p.phi_integral(s, t).unwrap());
        prop_assert!(p.mean_mass(x + dx, s, t).unwrap() >= p.mean_mass(x, s, t).unwrap());
    }

    #[test]
    fn sampler_inverts_cdf(x in 0.01f64..10.0, eps in 0.01f64..0.49, q in 0.0f64..50.0, u in 0.0f64..1.0, du in 0.0f64..0.5) {
        let k = AuxKernel::new(x, eps, q);
        let y = k.sample(u);
        let (lo, hi) = k.support();
        prop_assert!(y >= lo && y <= hi);
        prop_assert!((k.cdf(y) - u).abs() < 1e-9);
        prop_assert!(k.sample((u + du).min(1.0)) >= y);
    }

    #[test]
    fn label_round_trip(bits in prop::collection::vec(0u8..2, 0..40)) {
        let mut label = Label::root();
        for &b in &bits {
            label = label.child(b);
        }
        prop_assert_eq!(label.generation(), bits.len());
        let parsed: Label = label.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &label);
        if let Some(parent) = label.parent() {
            prop_assert!(parent.is_ancestor_of(&label));
        }
    }

    #[test]
    fn forest_structure(seed in any::<u64>(), x0 in 0.2f64..3.0, horizon in 0.0f64..2.0) {
        let p = ModelParams::new(1.0, 0.2, EnvironmentProfile::sinusoidal(1.0, 0.5)).unwrap();
        let f = simulate_forest(&p, x0, horizon, seed, ForestCaps::default()).unwrap();
        let ind = f.individuals();
        prop_assert_eq!(ind[0].birth_size, x0);
        for (i, v) in ind.iter().enumerate() {
            if let Some([c0, c1]) = v.children() {
                let d = v.division_time.unwrap();
                let size = f.size_at(i, d);
                let (y0, y1) = (ind[c0].birth_size, ind[c1].birth_size);
                prop_assert!(((y0 + y1) - size).abs() <= 1e-12 * size);
                let small = y0.min(y1);
                prop_assert!(small >= 0.2 * size * (1.0 - 1e-12));
                prop_assert_eq!(ind[c0].birth_time, d);
                prop_assert_eq!(ind[c0].parent(), Some(i));
            }
        }
        let mut last = 0;
        for k in 0..=8 {
            let n = f.count_at(horizon * k as f64 / 8.0).unwrap();
            prop_assert!(n >= last.max(1));
            last = n;
        }
    }

    #[test]
    fn reports_bracket_their_mean(xs in prop::collection::vec(-10.0f64..10.0, 2..50)) {
        let r = EstimatorReport::from_samples("x", 0, &xs).unwrap();
        prop_assert!(r.ci_low <= r.mean && r.mean <= r.ci_high && r.std_error >= 0.0);
    }

    #[test]
    fn decay_fit_recovers_rates(rate in -3.0f64..3.0, c in -2.0f64..2.0) {
        let pts = (0..5).map(|i| {
            let t = i as f64 * 0.7;
            DecayPoint { t, value: (c + rate * t).exp(), std_error: 0.0 }
        }).collect();
        let fit = DecayFit::fit(pts).unwrap();
        prop_assert!((fit.slope.unwrap() - rate).abs() < 1e-9);
    }
}
