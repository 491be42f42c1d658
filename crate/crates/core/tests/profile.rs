use proptest::prelude::*;
use simfilm::kernel::KernelModel;
use simfilm::profile::*;
use simfilm::spectral::EigenPairSet;

fn setup() -> (KernelModel, ProfileConfig) {
    (
        KernelModel::standard(1, 2).unwrap(),
        ProfileConfig::default(),
    )
}

#[test]
fn zero_exponent_reproduces_kernel() {
    let (m, cfg) = setup();
    let f = kernel_profile(&m, &cfg).unwrap();
    let sol = fixed_point_profile(&m, 0.0, 0.25, &f, &cfg).unwrap();
    let c = f.center_index();
    let err = sol
        .field
        .values
        .iter()
        .zip(&f.values)
        .map(|(a, b)| (a / sol.field.values[c] - b / f.values[c]).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
    assert_eq!(sol.n * sol.alpha + 4.0 * sol.beta_exp, 1.0);
}

#[test]
fn distance_to_kernel_is_linear_in_n() {
    let (m, cfg) = setup();
    let f = kernel_profile(&m, &cfg).unwrap();
    let ns = [0.01, 0.02, 0.04, 0.08];
    let branch = continuation(&m, &ns, 1, &cfg).unwrap();
    let pts: Vec<(f64, f64)> = branch
        .solutions
        .iter()
        .map(|s| (s.n.ln(), s.field.l2_distance(&f).unwrap().ln()))
        .collect();
    // least-squares slope in log-log
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 1.0).abs() <= 0.2, "{slope}");
    assert!(branch.increment_ratio(f.l2_norm()) <= 5.0);
    for s in &branch.solutions {
        // mass law alpha = 1/(4 + n)
        assert!((s.alpha - 1.0 / (4.0 + s.n)).abs() < 1e-15);
        assert!(s.pinned);
        assert!(s.residual < 1e-6, "{}", s.residual);
    }
}

#[test]
fn first_order_expansion_tightens_as_n_shrinks() {
    let (m, cfg) = setup();
    let f = kernel_profile(&m, &cfg).unwrap();
    let pairs = EigenPairSet::build(&m, 0, &cfg.grid().unwrap()).unwrap();
    let pert = solve_perturbation_k0(&m, &pairs, -1.0 / 16.0, cfg.eta).unwrap();
    assert!(
        pert.orthogonality_defect < 1e-6,
        "{}",
        pert.orthogonality_defect
    );
    let mut defects = Vec::new();
    for n in [0.01, 0.04] {
        let (alpha, _) = alpha_mass(1, n).unwrap();
        let sol = fixed_point_profile(&m, n, alpha, &f, &cfg).unwrap();
        let chk = first_order_check(&sol, &f, &pert).unwrap();
        assert!((chk.scale - 1.0).abs() < 0.1, "{chk:?}");
        defects.push(chk.relative_defect);
    }
    assert!(defects[0] < 0.05 && defects[0] < defects[1], "{defects:?}");
}

#[test]
fn profile_oscillates_with_monotone_envelope() {
    let (m, cfg) = setup();
    let f = kernel_profile(&m, &cfg).unwrap();
    let (alpha, _) = alpha_mass(1, 0.08).unwrap();
    let sol = fixed_point_profile(&m, 0.08, alpha, &f, &cfg).unwrap();
    let rep = oscillation_report(&sol);
    assert!(rep.sign_changes.len() >= 3, "{:?}", rep.sign_changes);
    assert!(rep.envelope_monotone);
    // zeros stay close to those of the kernel at small n
    let rk = oscillation_report_of(&f, 0.0);
    for (a, b) in rep.sign_changes.iter().zip(&rk.sign_changes).take(3) {
        assert!((a - b).abs() < 0.1 * b, "{a} {b}");
    }
    assert_eq!(
        rep.regularity_index,
        Some((3.0f64 / 0.08).floor() as i64 - 1)
    );
}

#[test]
fn rejects_non_mass_law_dimension() {
    let (m, cfg) = setup();
    let err = continuation(&m, &[0.01], 2, &cfg).unwrap_err();
    assert!(err.partial.solutions.is_empty());
}

proptest! {
    #[test]
    fn exponent_identity(n in 0.0f64..3.0, dim in 1usize..4) {
        let (alpha, beta) = alpha_mass(dim, n).unwrap();
        let d = dim as f64;
        prop_assert!((alpha - d / (4.0 + d * n)).abs() < 1e-15);
        prop_assert!((n * alpha + 4.0 * beta - 1.0).abs() < 1e-15);
        prop_assert!((beta_exponent(n, alpha) - beta).abs() < 1e-15);
    }

    #[test]
    fn expansion_is_first_order_in_n(mu in -1.0f64..1.0, n in 0.0f64..0.1, dim in 1usize..4, k in 0u32..4) {
        let a0 = alpha_expansion(k, dim, 0.0, mu);
        prop_assert!((a0 - (dim as f64 + k as f64) / 4.0).abs() < 1e-15);
        prop_assert!((alpha_expansion(k, dim, n, mu) - a0 - n * mu).abs() < 1e-14);
    }
}
