use proptest::prelude::*;
use simfilm::homotopy::*;

/// Naive DFT solution of the periodic discrete bi-harmonic flow,
/// multiplying mode `k` by `g(lambda_k)` with `lambda_k = (4/h^2 sin^2(pi k/n))^2`.
fn dft_filter(u: &[f64], h: f64, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = u.len();
    let tau = 2.0 * std::f64::consts::PI / n as f64;
    let mut out = vec![0.0; n];
    for k in 0..n {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in u.iter().enumerate() {
            let a = tau * ((k * j) % n) as f64;
            re += v * a.cos();
            im -= v * a.sin();
        }
        let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
        let lam = (4.0 * s * s / (h * h)).powi(2);
        let f = g(lam) / n as f64;
        for (j, o) in out.iter_mut().enumerate() {
            let a = tau * ((k * j) % n) as f64;
            *o += f * (re * a.cos() - im * a.sin());
        }
    }
    out
}

fn small() -> PdeConfig {
    PdeConfig {
        cells: 128,
        domain_half_width: 8.0,
        ..PdeConfig::default()
    }
}

#[test]
fn unit_mobility_step_is_implicit_euler() {
    let cfg = small();
    let u0 = default_initial_data(&cfg).unwrap();
    let h = cfg.spacing();
    let dt = 0.01;
    let s = PdeState::new(0.0, u0.values.clone()).unwrap();
    let (next, _) = step(&s, &cfg, dt).unwrap();
    let want = dft_filter(&u0.values, h, |l| 1.0 / (1.0 + dt * l));
    let err = next
        .values
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn fft_reference_matches_naive_dft() {
    let cfg = small();
    let u0 = default_initial_data(&cfg).unwrap();
    let h = cfg.spacing();
    let got = biharmonic_reference(&u0.values, cfg.domain_half_width, 0.3, Symbol::Discrete);
    let want = dft_filter(&u0.values, h, |l| (-0.3 * l).exp());
    let err = got
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
}

#[test]
fn regularized_run_invariants() {
    let base = PdeConfig::default();
    let u0 = default_initial_data(&base).unwrap();
    let cfg = base.with_mobility(0.05, 0.2);
    let r = run(&cfg, &u0).unwrap();
    assert!(r.checks.mass_drift < 1e-10, "{}", r.checks.mass_drift);
    assert!(
        r.checks.energy_balance_defect <= 0.02,
        "{}",
        r.checks.energy_balance_defect
    );
    assert!(r.checks.energy_non_increasing);
    assert!(
        r.checks.parabolicity_margin >= 1.0,
        "{}",
        r.checks.parabolicity_margin
    );
    assert!(r
        .diagnostics
        .iter()
        .all(|d| d.min_phi >= cfg.eps.powf(cfg.n)));
    // the ladder: T 2^-k for k < 20, plus t = 0
    assert_eq!(r.snapshots.len(), 21);
    assert_eq!(r.snapshots.last().unwrap().time, cfg.t_final);
}

#[test]
fn unit_mobility_converges_first_order_in_dt() {
    let cfg = PdeConfig {
        t_final: 0.1,
        ..PdeConfig::default()
    };
    let u0 = default_initial_data(&cfg).unwrap();
    let rep = biharmonic_convergence(&cfg, &u0, &[4e-3, 2e-3, 1e-3, 5e-4]).unwrap();
    for p in &rep.orders {
        assert!(*p >= 1.0, "{:?}", rep.orders);
    }
    for p in &rep.l2_orders {
        assert!((p - 1.0).abs() < 0.01, "{:?}", rep.l2_orders);
    }
}

#[test]
fn degenerate_run_holder_exponent() {
    let cfg = PdeConfig::degenerate();
    let u0 = default_initial_data(&cfg).unwrap();
    let r = run(&cfg, &u0).unwrap();
    let rep = holder_report(&r).unwrap();
    assert!(
        rep.temporal_exponent >= 0.125 - 0.02,
        "{}",
        rep.temporal_exponent
    );
    assert!(rep.spatial_half_modulus.is_finite());
}

#[test]
fn flux_bounded_as_eps_shrinks() {
    let base = PdeConfig {
        t_final: 0.25,
        ..PdeConfig::default()
    };
    let u0 = default_initial_data(&base).unwrap();
    let flux: Vec<f64> = [0.1, 0.05, 0.01]
        .iter()
        .map(|&e| {
            run(&base.clone().with_mobility(e, 0.5), &u0)
                .unwrap()
                .checks
                .flux_sq
        })
        .collect();
    let (lo, hi) = (
        flux.iter().cloned().fold(f64::INFINITY, f64::min),
        flux.iter().cloned().fold(0.0, f64::max),
    );
    assert!(hi.is_finite() && hi <= 2.0 * lo, "{flux:?}");
}

#[test]
fn limit_study_directions() {
    let base = PdeConfig::default();
    let u0 = default_initial_data(&base).unwrap();
    let eps = [1e-1, 1e-2, 1e-3];
    let good = limit_study(&schedule_sqrt_log(&eps), &u0, 0.5, &base, 3).unwrap();
    assert!(good.strictly_decreasing, "{:?}", good.rows);
    let bad = limit_study(&schedule_log_squared(&eps), &u0, 0.5, &base, 3).unwrap();
    assert!(!bad.strictly_decreasing, "{:?}", bad.rows);
    // eps^{n/2} -> 0 along the first schedule only
    assert!(good.rows[2].eps_pow < good.rows[0].eps_pow);
    assert!(bad.rows[2].eps_pow > bad.rows[0].eps_pow);
}

#[test]
fn rejects_bad_configs() {
    assert!(PdeConfig {
        cells: 3,
        ..PdeConfig::default()
    }
    .validate()
    .is_err());
    assert!(PdeConfig::default()
        .with_mobility(0.0, 1.0)
        .validate()
        .is_err());
    assert!(PdeConfig::default()
        .with_mobility(0.5, -1.0)
        .validate()
        .is_err());
}

fn smooth_data() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4).prop_map(|modes| {
        let n = 64;
        (0..n)
            .map(|j| {
                let x = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                modes
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        a * ((k + 1) as f64 * x).cos() + b * ((k + 1) as f64 * x).sin()
                    })
                    .sum::<f64>()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_conserves_mass_and_balances_energy(
        u in smooth_data(),
        eps in 0.01f64..1.0,
        n in 0.0f64..2.0,
        dt in 1e-4f64..1e-1,
    ) {
        let cfg = PdeConfig { cells: 64, domain_half_width: 4.0, ..PdeConfig::default() }.with_mobility(eps, n);
        let h = cfg.spacing();
        let s = PdeState::new(0.0, u).unwrap();
        let (next, info) = step(&s, &cfg, dt).unwrap();
        let m0 = mass(&s.values, h);
        prop_assert!((mass(&next.values, h) - m0).abs() < 1e-12 * m0.abs().max(1.0));
        let (e0, e1) = (gradient_energy(&s.values, h), gradient_energy(&next.values, h));
        prop_assert!((e1 + info.dissipation + info.numerical_dissipation - e0).abs() < 1e-10 * e0.max(1e-300));
        prop_assert!(e1 <= e0 * (1.0 + 1e-12));
        prop_assert!(info.min_phi >= eps.powf(n) * (1.0 - 1e-12));
    }
}
