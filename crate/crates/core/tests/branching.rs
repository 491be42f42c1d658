mod common;

use common::{scan_intersections, scan_kind};
use proptest::prelude::*;
use simfilm::branching::*;
use simfilm::kernel::{KernelConfig, KernelModel};
use simfilm::spectral::EigenPairSet;
use simfilm::GridSpec;

fn plane_setup(max_order: u32) -> (KernelModel, EigenPairSet) {
    let m = KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0)).unwrap();
    let g = GridSpec::square(32.0, 0.25).unwrap();
    let pairs = EigenPairSet::build(&m, max_order, &g).unwrap();
    (m, pairs)
}

#[test]
fn k0_line_matches_minus_one_sixteenth() {
    let m = KernelModel::standard(1, 2).unwrap();
    let pairs = EigenPairSet::build(&m, 0, &GridSpec::line(40.0, 0.01).unwrap()).unwrap();
    let r = assemble_k0(&m, &pairs, &SingularQuadConfig::default()).unwrap();
    assert!(
        (r.mu_first + 1.0 / 16.0).abs() < 0.02 / 16.0,
        "{}",
        r.mu_first
    );
    // psi*_0 = 1 has no gradient
    assert_eq!(r.log_term, 0.0);
}

#[test]
fn k0_is_scale_invariant() {
    let m = KernelModel::standard(1, 2).unwrap();
    let pairs = EigenPairSet::build(&m, 0, &GridSpec::line(40.0, 0.02).unwrap()).unwrap();
    let cfg = SingularQuadConfig::default();
    let a = assemble_k0(&m, &pairs, &cfg).unwrap().mu_first;
    let b = assemble_k0_scaled(&m, &pairs, &cfg, 3.5).unwrap().mu_first;
    assert!((a - b).abs() < 1e-12 * a.abs(), "{a} {b}");
}

#[test]
fn k0_alpha_expansion_near_mass_law() {
    // alpha_0(0) + n mu = N/(4 + N n) + O(n^2); here N = 1
    let m = KernelModel::standard(1, 2).unwrap();
    let pairs = EigenPairSet::build(&m, 0, &GridSpec::line(40.0, 0.01).unwrap()).unwrap();
    let r = assemble_k0(&m, &pairs, &SingularQuadConfig::default()).unwrap();
    let n = 0.05;
    let err = (r.alpha0 + n * r.mu_first - 1.0 / (4.0 + n)).abs();
    assert!(err < 5e-4, "{err}");
}

#[test]
fn plane_levels_dipole_and_triple() {
    let (m, pairs) = plane_setup(2);
    let cfg = SingularQuadConfig::default();

    let k0 = assemble_k0(&m, &pairs, &cfg).unwrap();
    assert!(
        (k0.mu_first + 4.0 / 16.0).abs() < 0.02 * 0.25,
        "{}",
        k0.mu_first
    );

    let sys = assemble_dipole(&m, &pairs, &cfg).unwrap();
    let s = sys.summary();
    assert!(
        s.diagonal_swap_defect.abs() < 1e-10,
        "{}",
        s.diagonal_swap_defect
    );
    assert!(s.cross_swap_defect.abs() < 1e-10, "{}", s.cross_swap_defect);
    // rotation invariance makes the quadratic vanish
    for v in [s.a, s.b, s.c] {
        assert!(v.abs() <= 10.0 * s.coefficient_noise, "{v}");
    }
    // exchanging psi_1 and psi_2 maps the equation at c2 to minus itself at 1 - c2
    let swapped = sys.swapped().unwrap();
    for j in 0..=8 {
        let c2 = j as f64 / 8.0;
        let (r, rs) = (
            sys.residual(c2).unwrap(),
            swapped.residual(1.0 - c2).unwrap(),
        );
        assert!((r + rs).abs() < 1e-12, "{c2}: {r} vs {rs}");
    }
    let rep = solve_dipole(&sys, &SolveOptions::default()).unwrap();
    assert_eq!(rep.structure, SolutionStructure::Continuum);
    assert_eq!(rep.root_count, rep.conditions.predicted);
    let roots: Vec<f64> = rep
        .solutions
        .iter()
        .map(|s| s.coefficients["(0,1)"])
        .collect();
    for r in &roots {
        let d = roots
            .iter()
            .map(|q| (q - (1.0 - r)).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-8, "{r} has no mirror root");
    }
    let rep_s = solve_dipole(&swapped, &SolveOptions::default()).unwrap();
    assert_eq!(rep_s.root_count, rep.root_count);

    let tri = assemble_triple(&m, &pairs, &cfg).unwrap();
    assert!(tri.nondegeneracy.abs() > NONDEGENERACY_THRESHOLD);
    let rep = solve_triple(
        &tri,
        &SolveOptions {
            lattice: 6,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    assert_eq!(rep.structure, SolutionStructure::Continuum);
    // the radial combination psi_(2,0) + psi_(0,2) is an isolated root
    let radial = rep
        .solutions
        .iter()
        .zip(&rep.jacobian_ratios)
        .find(|(s, _)| {
            (s.coefficients["(2,0)"] - 0.5).abs() < 1e-6
                && (s.coefficients["(0,2)"] - 0.5).abs() < 1e-6
        });
    let (_, ratio) = radial.expect("radial root");
    assert!(*ratio > 0.1, "{ratio}");
}

fn conic_strategy() -> impl Strategy<Value = Conic> {
    prop::array::uniform6(-1.0f64..1.0).prop_map(|v| Conic {
        a: v[0],
        b: v[1],
        c: v[2],
        d: v[3],
        e: v[4],
        f: v[5],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn classifier_matches_sign_scan(k in conic_strategy()) {
        let class = classify_conic(&k);
        // stay away from the measure-zero boundaries between classes
        let q = k.a.abs().max(k.b.abs()).max(k.e.abs());
        prop_assume!(class.discriminant.abs() > 1e-6 * q * q);
        prop_assume!(class.determinant.abs() > 1e-6);
        let kind = match class.kind { ConicKind::Circle => ConicKind::Ellipse, other => other };
        prop_assert_eq!(kind, scan_kind(&k), "{:?}", class);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn intersections_match_scan(p in conic_strategy(), q in conic_strategy()) {
        // the scan oracle solves p for either coordinate
        prop_assume!(p.a.abs() > 0.1 && p.b.abs() > 0.1);
        let r = 3.0;
        let got = intersect(&p, &q).unwrap();
        prop_assert!(got.len() <= 4);
        let inside: Vec<[f64; 2]> = got.iter().copied().filter(|z| z[0].abs() < r - 1e-6 && z[1].abs() < r - 1e-6).collect();
        let want: Vec<[f64; 2]> = scan_intersections(&p, &q, r).into_iter().filter(|z| z[0].abs() < r - 1e-6 && z[1].abs() < r - 1e-6).collect();
        // near-tangent pairs closer than the scan step cannot be resolved by the oracle
        let tangent = got.iter().enumerate().any(|(i, u)| got[i + 1..].iter().any(|v| (u[0] - v[0]).abs() < 1e-4));
        prop_assume!(!tangent);
        prop_assert_eq!(inside.len(), want.len(), "{:?} vs {:?}", inside, want);
        for w in &want {
            let d = inside.iter().map(|z| (z[0] - w[0]).abs().max((z[1] - w[1]).abs())).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-10, "{:?} missing, nearest {:e}", w, d);
        }
    }

    #[test]
    fn intersection_count_at_most_four(p in conic_strategy(), q in conic_strategy()) {
        if let Ok(pts) = intersect(&p, &q) {
            prop_assert!(pts.len() <= 4);
            for z in pts {
                prop_assert!(p.eval(z[0], z[1]).abs() < 1e-8 * (1.0 + z[0] * z[0] + z[1] * z[1]));
            }
        }
    }
}

#[test]
fn root_conditions_match_direct_count() {
    // (a)-(c) against a sign count on a fine lattice
    let cases = [
        (1.0, -1.0, 0.2),
        (1.0, -1.0, 0.3),
        (-2.0, 1.0, 0.1),
        (1.0, 0.5, 0.3),
        (1.0, -3.0, 1.0),
    ];
    for (a, b, c) in cases {
        let rc = root_conditions(a, b, c, 0.0);
        let f = |x: f64| a * x * x + b * x + c;
        let n = 100_000;
        let changes = (0..n)
            .filter(|&i| f(i as f64 / n as f64) * f((i + 1) as f64 / n as f64) < 0.0)
            .count();
        assert_eq!(rc.predicted, RootCount::Finite(changes), "{a} {b} {c}");
    }
}
