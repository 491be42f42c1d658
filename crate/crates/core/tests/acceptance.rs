//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to
//! stderr (bypassing the harness capture) before asserting.

mod common;

use std::f64::consts::PI;
use std::io::Write;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use simfilm::branching::*;
use simfilm::homotopy::*;
use simfilm::kernel::{check_decay_envelope, eval_kernel, kernel_mass, KernelConfig, KernelModel};
use simfilm::profile::*;
use simfilm::semigroup::{
    bump_derivative, compare, decay_slope, evolve_convolution, evolve_expansion, unit_bump,
};
use simfilm::spectral::{apply_b, gram_matrix, EigenPairSet, GramQuadrature};
use simfilm::{GridSpec, SampledField};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!(
        "acceptance {id:>2} {:<28} {}  {detail}\n",
        name,
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn plane_model() -> KernelModel {
    KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0)).unwrap()
}

fn plane_grid() -> GridSpec {
    GridSpec::square(32.0, 0.25).unwrap()
}

#[test]
fn c01_kernel_normalization_and_residual() {
    let mut worst_mass = 0.0f64;
    let mut worst_res = 0.0f64;
    for (dim, grid) in [
        (1, GridSpec::line(10.0, 0.05).unwrap()),
        (2, GridSpec::square(10.0, 0.25).unwrap()),
    ] {
        let m = KernelModel::standard(dim, 2).unwrap();
        worst_mass = worst_mass.max((kernel_mass(&m).unwrap() - 1.0).abs());
        let f = eval_kernel(&m, &grid).unwrap();
        worst_res = worst_res.max(apply_b(&m, &f).unwrap().max_abs());
    }
    report(
        1,
        "kernel normalization",
        worst_mass < 1e-8 && worst_res < 1e-6,
        format!("|int F - 1| = {worst_mass:.2e}, |BF|_inf = {worst_res:.2e}"),
    );
}

#[test]
fn c02_gaussian_oracle_and_hermite_gram() {
    let m = KernelModel::standard(1, 1).unwrap();
    let g = GridSpec::line(20.0, 0.05).unwrap();
    let f = eval_kernel(&m, &g).unwrap();
    let exact = SampledField::from_fn(g.clone(), |p| {
        (-p[0] * p[0] / 4.0).exp() / (4.0 * PI).sqrt()
    })
    .unwrap();
    let err = f.linf_distance(&exact).unwrap();
    let pairs = EigenPairSet::build(&m, 4, &g).unwrap();
    let gram = gram_matrix(&pairs, &GramQuadrature::default())
        .unwrap()
        .identity_error();
    report(
        2,
        "gaussian oracle",
        err < 1e-10 && gram < 1e-8,
        format!("kernel {err:.2e}, gram {gram:.2e}"),
    );
}

#[test]
fn c03_envelope_law() {
    let m = KernelModel::standard(1, 2).unwrap();
    let f = eval_kernel(&m, &GridSpec::line(30.0, 0.01).unwrap()).unwrap();
    let rep = check_decay_envelope(&f).unwrap();
    let d0 = 3.0 * 2f64.powf(-11.0 / 3.0);
    let pass = (rep.fitted_d - d0).abs() < 0.25 * d0 && rep.rms_four_thirds < rep.rms_quadratic;
    report(
        3,
        "envelope law",
        pass,
        format!(
            "d = {:.5} vs {d0:.5}, rms 4/3 {:.3e} < quadratic {:.3e}",
            rep.fitted_d, rep.rms_four_thirds, rep.rms_quadratic
        ),
    );
}

#[test]
fn c04_bi_orthonormality() {
    let m = KernelModel::standard(1, 2).unwrap();
    let err = |half: f64| {
        let pairs = EigenPairSet::build(&m, 4, &GridSpec::line(half, 0.1).unwrap()).unwrap();
        gram_matrix(&pairs, &GramQuadrature::default())
            .unwrap()
            .identity_error()
    };
    let (a, b) = (err(36.0), err(72.0));
    report(
        4,
        "bi-orthonormality",
        a < 1e-6 && b * 10.0 <= a,
        format!("gram {a:.2e}, doubled {b:.2e}"),
    );
}

#[test]
fn c05_semigroup_equivalence() {
    let m = KernelModel::standard(1, 2).unwrap();
    let g = GridSpec::line(30.0, 0.05).unwrap();
    let u = unit_bump(&g).unwrap();
    let pairs = EigenPairSet::build(&m, 8, &g).unwrap();
    let mut worst = 0.0f64;
    for tau in [1.0, 2.0, 4.0] {
        let a = evolve_expansion(&pairs, &u, tau, 8).unwrap();
        let b = evolve_convolution(&m, &u, tau).unwrap();
        worst = worst.max(compare(&a, &b, tau, 8).unwrap().l2_error);
    }
    let taus = [6.0, 7.0, 8.0, 9.0, 10.0];
    let mut slope_err = 0.0f64;
    for k in [1u32, 2] {
        let v = bump_derivative(&g, k).unwrap();
        let norms: Vec<f64> = taus
            .iter()
            .map(|&t| evolve_convolution(&m, &v, t).unwrap().l2_norm())
            .collect();
        let want = -(k as f64) / 4.0;
        slope_err = slope_err.max(((decay_slope(&taus, &norms).unwrap() - want) / want).abs());
    }
    report(
        5,
        "semigroup equivalence",
        worst < 1e-4 && slope_err < 0.05,
        format!("L2 gap {worst:.2e}, slope rel err {slope_err:.3}"),
    );
}

#[test]
fn c06_branching_anchor() {
    let cfg = SingularQuadConfig::default();
    let m1 = KernelModel::standard(1, 2).unwrap();
    let p1 = EigenPairSet::build(&m1, 0, &GridSpec::line(40.0, 0.01).unwrap()).unwrap();
    let r1 = assemble_k0(&m1, &p1, &cfg).unwrap();
    let m2 = plane_model();
    let p2 = EigenPairSet::build(&m2, 0, &plane_grid()).unwrap();
    let r2 = assemble_k0(&m2, &p2, &cfg).unwrap();
    let n = 0.05;
    let mut rel = 0.0f64;
    let mut expansion = 0.0f64;
    for (dim, r) in [(1.0, &r1), (2.0, &r2)] {
        rel = rel.max(((r.mu_first + dim * dim / 16.0) / (dim * dim / 16.0)).abs());
        expansion = expansion.max((dim / 4.0 + n * r.mu_first - dim / (4.0 + dim * n)).abs());
    }
    report(
        6,
        "branching anchor",
        rel < 0.02 && expansion < 5e-4,
        format!(
            "mu rel err {rel:.2e} (N=1 {:.6}, N=2 {:.6}), expansion err {expansion:.2e}",
            r1.mu_first, r2.mu_first
        ),
    );
}

#[test]
fn c07_dipole_system() {
    let m = plane_model();
    let pairs = EigenPairSet::build(&m, 1, &plane_grid()).unwrap();
    let sys = assemble_dipole(&m, &pairs, &SingularQuadConfig::default()).unwrap();
    let s = sys.summary();
    let swap = s.diagonal_swap_defect.abs().max(s.cross_swap_defect.abs());
    let rep = solve_dipole(&sys, &SolveOptions::default()).unwrap();
    let roots: Vec<f64> = rep
        .solutions
        .iter()
        .map(|s| s.coefficients["(0,1)"])
        .collect();
    let closure = roots
        .iter()
        .map(|r| {
            roots
                .iter()
                .map(|q| (q - (1.0 - r)).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let count_ok = rep.root_count == rep.conditions.predicted;
    report(
        7,
        "dipole system",
        swap < 1e-10 && closure < 1e-8 && count_ok,
        format!(
            "swap defect {swap:.2e}, closure {closure:.2e}, roots {:?} vs predicted {:?}",
            rep.root_count, rep.conditions.predicted
        ),
    );
}

#[test]
fn c08_conic_machinery() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let coef = |rng: &mut StdRng| rng.random_range(-1.0..1.0);
    let (mut agree, mut checked) = (0, 0);
    for _ in 0..1000 {
        let k = Conic {
            a: coef(&mut rng),
            b: coef(&mut rng),
            c: coef(&mut rng),
            d: coef(&mut rng),
            e: coef(&mut rng),
            f: coef(&mut rng),
        };
        let class = classify_conic(&k);
        let q = k.a.abs().max(k.b.abs()).max(k.e.abs());
        if class.discriminant.abs() <= 1e-6 * q * q || class.determinant.abs() <= 1e-6 {
            continue;
        }
        checked += 1;
        let kind = if class.kind == ConicKind::Circle {
            ConicKind::Ellipse
        } else {
            class.kind
        };
        agree += usize::from(kind == common::scan_kind(&k));
    }
    // quadratic coefficients bounded away from zero so the scan oracle can
    // solve for either coordinate
    let big = |rng: &mut StdRng| {
        let v: f64 = rng.random_range(0.1..1.0);
        if rng.random_range(0.0..1.0) < 0.5 {
            -v
        } else {
            v
        }
    };
    let (mut worst, mut max_count, mut pairs_ok, mut compared) = (0.0f64, 0, 0, 0);
    for _ in 0..100 {
        let conic = |rng: &mut StdRng| Conic {
            a: big(rng),
            b: big(rng),
            c: rng.random_range(-1.0..1.0),
            d: rng.random_range(-1.0..1.0),
            e: rng.random_range(-1.0..1.0),
            f: rng.random_range(-1.0..1.0),
        };
        let (p, q) = (conic(&mut rng), conic(&mut rng));
        let got = intersect(&p, &q).unwrap();
        max_count = max_count.max(got.len());
        if got
            .iter()
            .enumerate()
            .any(|(i, u)| got[i + 1..].iter().any(|v| (u[0] - v[0]).abs() < 1e-4))
        {
            continue;
        }
        compared += 1;
        let r = 3.0;
        let inside = |z: &[f64; 2]| z[0].abs() < r - 1e-6 && z[1].abs() < r - 1e-6;
        let mine: Vec<[f64; 2]> = got.iter().copied().filter(inside).collect();
        let want: Vec<[f64; 2]> = common::scan_intersections(&p, &q, r)
            .into_iter()
            .filter(inside)
            .collect();
        if mine.len() == want.len() {
            pairs_ok += 1;
        }
        for w in &want {
            let d = mine
                .iter()
                .map(|z| (z[0] - w[0]).abs().max((z[1] - w[1]).abs()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    report(
        8,
        "conic machinery",
        agree == checked && pairs_ok == compared && worst < 1e-10 && max_count <= 4,
        format!(
            "classes {agree}/{checked}, intersections {pairs_ok}/{compared} (max dev {worst:.1e}), max count {max_count}"
        ),
    );
}

#[test]
fn c09_profile_branch() {
    let m = KernelModel::standard(1, 2).unwrap();
    let cfg = ProfileConfig::default();
    let f = kernel_profile(&m, &cfg).unwrap();
    let sol = fixed_point_profile(&m, 0.0, 0.25, &f, &cfg).unwrap();
    let c = f.center_index();
    let reproduce = sol
        .field
        .values
        .iter()
        .zip(&f.values)
        .map(|(a, b)| (a / sol.field.values[c] - b / f.values[c]).abs())
        .fold(0.0, f64::max);
    let ns = [0.01, 0.02, 0.04, 0.08];
    let branch = continuation(&m, &ns, 1, &cfg).unwrap();
    let pts: Vec<(f64, f64)> = branch
        .solutions
        .iter()
        .map(|s| (s.n.ln(), s.field.l2_distance(&f).unwrap().ln()))
        .collect();
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    report(
        9,
        "profile branch",
        reproduce < 1e-8 && (slope - 1.0).abs() <= 0.2,
        format!("n=0 deviation {reproduce:.2e}, slope {slope:.4}"),
    );
}

#[test]
fn c10_pde_invariants() {
    let base = PdeConfig::default();
    let u0 = default_initial_data(&base).unwrap();
    let r = run(&base.clone().with_mobility(0.05, 0.2), &u0).unwrap();
    let conv = biharmonic_convergence(
        &PdeConfig {
            t_final: 0.1,
            ..base.clone()
        },
        &u0,
        &[4e-3, 2e-3, 1e-3, 5e-4],
    )
    .unwrap();
    let min_order = conv.orders.iter().cloned().fold(f64::INFINITY, f64::min);
    report(
        10,
        "pde invariants",
        r.checks.mass_drift < 1e-10 && r.checks.energy_balance_defect <= 0.02 && min_order >= 1.0,
        format!(
            "mass drift {:.2e}, energy defect {:.2e}, dt order {min_order:.4} (L2 {:?})",
            r.checks.mass_drift,
            r.checks.energy_balance_defect,
            conv.l2_orders
                .iter()
                .map(|p| (p * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn c11_holder_ladder() {
    let cfg = PdeConfig::degenerate();
    let u0 = default_initial_data(&cfg).unwrap();
    let rep = holder_report(&run(&cfg, &u0).unwrap()).unwrap();
    report(
        11,
        "holder ladder",
        rep.temporal_exponent >= 0.125 - 0.02,
        format!("temporal exponent {:.4}", rep.temporal_exponent),
    );
}

#[test]
fn c12_homotopy_schedule() {
    let base = PdeConfig::default();
    let u0 = default_initial_data(&base).unwrap();
    let eps = [1e-1, 1e-2, 1e-3];
    let good = limit_study(&schedule_sqrt_log(&eps), &u0, 0.5, &base, 3).unwrap();
    let bad = limit_study(&schedule_log_squared(&eps), &u0, 0.5, &base, 3).unwrap();
    let d = |s: &LimitStudy| {
        s.rows
            .iter()
            .map(|r| format!("{:.4}", r.distance))
            .collect::<Vec<_>>()
            .join(" ")
    };
    report(
        12,
        "homotopy schedule",
        good.strictly_decreasing && !bad.strictly_decreasing,
        format!("sqrt-log [{}], log-squared [{}]", d(&good), d(&bad)),
    );
}
