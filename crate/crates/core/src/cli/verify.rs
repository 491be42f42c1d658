//! The acceptance suite behind `simfilm verify`. `--quick` keeps the cheap
//! checks; the full run adds the plane levels, the Hölder ladder and the
//! limit schedules.

use serde_json::json;

use super::commands::Outcome;
use super::config::VerifyOpts;
use super::emit::{fmt_f64, InvariantCheck, Results};
use crate::branching::{
    assemble_dipole, assemble_k0, classify_conic, intersect, solve_dipole, Conic, ConicKind,
    SingularQuadConfig, SolveOptions,
};
use crate::error::Result;
use crate::homotopy::{
    biharmonic_convergence, default_initial_data, holder_report, limit_study, run,
    schedule_log_squared, schedule_sqrt_log, PdeConfig,
};
use crate::kernel::{check_decay_envelope, eval_kernel, kernel_mass, KernelConfig, KernelModel};
use crate::profile::{continuation, fixed_point_profile, kernel_profile, ProfileConfig};
use crate::semigroup::{
    bump_derivative, compare, decay_slope, evolve_convolution, evolve_expansion, unit_bump,
};
use crate::spectral::{apply_b, gram_matrix, EigenPairSet, GramQuadrature};
use crate::{GridSpec, SampledField};

type Check = fn(bool, f64) -> Result<Vec<InvariantCheck>>;

/// `(name, in the quick subset, check)`; a check receives `full` and the bound scale.
const SUITE: [(&str, bool, Check); 12] = [
    ("kernel normalization", true, kernel_normalization),
    ("gaussian oracle", true, gaussian_oracle),
    ("envelope law", false, envelope_law),
    ("bi-orthonormality", true, bi_orthonormality),
    ("semigroup equivalence", true, semigroup_equivalence),
    ("branching anchor", true, branching_anchor),
    ("dipole system", false, dipole_system),
    ("conic machinery", true, conic_machinery),
    ("profile branch", true, profile_branch),
    ("pde invariants", true, pde_invariants),
    ("holder ladder", false, holder_ladder),
    ("homotopy schedule", false, homotopy_schedule),
];

fn kernel_normalization(full: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let mut cases = vec![(1, GridSpec::line(10.0, 0.05)?)];
    if full {
        cases.push((2, GridSpec::square(10.0, 0.25)?));
    }
    let (mut mass, mut res) = (0.0f64, 0.0f64);
    for (dim, grid) in cases {
        let m = KernelModel::standard(dim, 2)?;
        mass = mass.max((kernel_mass(&m)? - 1.0).abs());
        res = res.max(apply_b(&m, &eval_kernel(&m, &grid)?)?.max_abs());
    }
    Ok(vec![
        InvariantCheck::at_most("kernel mass defect", mass, 1e-8 * s),
        InvariantCheck::at_most("|BF| max", res, 1e-6 * s),
    ])
}

fn gaussian_oracle(_: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let m = KernelModel::standard(1, 1)?;
    let g = GridSpec::line(20.0, 0.05)?;
    let f = eval_kernel(&m, &g)?;
    let exact = SampledField::from_fn(g.clone(), |p| {
        (-p[0] * p[0] / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt()
    })?;
    let pairs = EigenPairSet::build(&m, 4, &g)?;
    Ok(vec![
        InvariantCheck::at_most("heat kernel deviation", f.linf_distance(&exact)?, 1e-10 * s),
        InvariantCheck::at_most(
            "hermite gram error",
            gram_matrix(&pairs, &GramQuadrature::default())?.identity_error(),
            1e-8 * s,
        ),
    ])
}

fn envelope_law(_: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let m = KernelModel::standard(1, 2)?;
    let rep = check_decay_envelope(&eval_kernel(&m, &GridSpec::line(30.0, 0.01)?)?)?;
    let d0 = 3.0 * 2f64.powf(-11.0 / 3.0);
    Ok(vec![
        InvariantCheck::at_most(
            "envelope d relative gap",
            ((rep.fitted_d - d0) / d0).abs(),
            0.25 * s,
        ),
        InvariantCheck::at_most(
            "rms 4/3 over quadratic",
            rep.rms_four_thirds / rep.rms_quadratic,
            1.0,
        ),
    ])
}

fn bi_orthonormality(full: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let m = KernelModel::standard(1, 2)?;
    let err = |half: f64| -> Result<f64> {
        let pairs = EigenPairSet::build(&m, 4, &GridSpec::line(half, 0.1)?)?;
        Ok(gram_matrix(&pairs, &GramQuadrature::default())?.identity_error())
    };
    let a = err(36.0)?;
    let mut out = vec![InvariantCheck::at_most("gram error L=36", a, 1e-6 * s)];
    if full {
        out.push(InvariantCheck::at_most(
            "gram error ratio L=72/L=36",
            err(72.0)? / a,
            0.1,
        ));
    }
    Ok(out)
}

fn semigroup_equivalence(full: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let m = KernelModel::standard(1, 2)?;
    let g = GridSpec::line(30.0, 0.05)?;
    let u = unit_bump(&g)?;
    let pairs = EigenPairSet::build(&m, 8, &g)?;
    let taus: &[f64] = if full { &[1.0, 2.0, 4.0] } else { &[1.0] };
    let mut worst = 0.0f64;
    for &tau in taus {
        let a = evolve_expansion(&pairs, &u, tau, 8)?;
        let b = evolve_convolution(&m, &u, tau)?;
        worst = worst.max(compare(&a, &b, tau, 8)?.l2_error);
    }
    let mut out = vec![InvariantCheck::at_most(
        "expansion vs convolution L2",
        worst,
        1e-4 * s,
    )];
    if full {
        let ts = [6.0, 7.0, 8.0, 9.0, 10.0];
        let mut slope_err = 0.0f64;
        for k in [1u32, 2] {
            let v = bump_derivative(&g, k)?;
            let norms: Vec<f64> = ts
                .iter()
                .map(|&t| Ok(evolve_convolution(&m, &v, t)?.l2_norm()))
                .collect::<Result<_>>()?;
            let want = -(k as f64) / 4.0;
            slope_err = slope_err.max(((decay_slope(&ts, &norms)? - want) / want).abs());
        }
        out.push(InvariantCheck::at_most(
            "decay slope relative error",
            slope_err,
            0.05 * s,
        ));
    }
    Ok(out)
}

fn branching_anchor(full: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let cfg = SingularQuadConfig::default();
    let mut out = Vec::new();
    let m1 = KernelModel::standard(1, 2)?;
    let p1 = EigenPairSet::build(&m1, 0, &GridSpec::line(40.0, 0.01)?)?;
    out.push(InvariantCheck::at_most(
        "mu_1,0 vs -1/16 (N=1)",
        assemble_k0(&m1, &p1, &cfg)?.relative_error,
        0.02 * s,
    ));
    if full {
        let m2 = KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0))?;
        let p2 = EigenPairSet::build(&m2, 0, &GridSpec::square(32.0, 0.25)?)?;
        out.push(InvariantCheck::at_most(
            "mu_1,0 vs -1/4 (N=2)",
            assemble_k0(&m2, &p2, &cfg)?.relative_error,
            0.02 * s,
        ));
    }
    Ok(out)
}

fn dipole_system(_: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let m = KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0))?;
    let pairs = EigenPairSet::build(&m, 1, &GridSpec::square(32.0, 0.25)?)?;
    let sys = assemble_dipole(&m, &pairs, &SingularQuadConfig::default())?;
    let c = sys.summary();
    let rep = solve_dipole(&sys, &SolveOptions::default())?;
    let roots: Vec<f64> = rep
        .solutions
        .iter()
        .filter_map(|s| s.coefficients.get("(0,1)").copied())
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
    Ok(vec![
        InvariantCheck::at_most(
            "swap defect",
            c.diagonal_swap_defect.abs().max(c.cross_swap_defect.abs()),
            1e-10 * s,
        ),
        InvariantCheck::at_most("root set closed under c -> 1-c", closure, 1e-8 * s),
        InvariantCheck::flag(
            "root count matches conditions",
            rep.root_count == rep.conditions.predicted,
        ),
    ])
}

fn conic_machinery(_: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    // a x^2 + b y^2 + c x + d y + e xy + f
    let k = |a, b, c, d, e, f| Conic { a, b, c, d, e, f };
    let cases = [
        (k(1.0, 1.0, 0.0, 0.0, 0.0, -1.0), ConicKind::Circle),
        (k(2.0, 1.0, 0.0, 0.0, 0.0, -1.0), ConicKind::Ellipse),
        (k(1.0, -1.0, 0.0, 0.0, 0.0, -1.0), ConicKind::Hyperbola),
        (k(0.0, 0.0, 0.0, 0.0, 1.0, -1.0), ConicKind::Hyperbola),
    ];
    let agree = cases
        .iter()
        .filter(|(c, want)| classify_conic(c).kind == *want)
        .count();
    // unit circles about 0 and (1, 0) meet at (1/2, +-sqrt(3)/2)
    let pts = intersect(
        &k(1.0, 1.0, 0.0, 0.0, 0.0, -1.0),
        &k(1.0, 1.0, -2.0, 0.0, 0.0, 0.0),
    )?;
    let h = 0.75f64.sqrt();
    let dev = [[0.5, h], [0.5, -h]]
        .iter()
        .map(|w| {
            pts.iter()
                .map(|z| (z[0] - w[0]).abs().max((z[1] - w[1]).abs()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(vec![
        InvariantCheck::flag("classification of reference conics", agree == cases.len()),
        InvariantCheck::flag("two intersection points", pts.len() == 2),
        InvariantCheck::at_most("intersection deviation", dev, 1e-12 * s),
    ])
}

fn profile_branch(full: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let m = KernelModel::standard(1, 2)?;
    let cfg = ProfileConfig::default();
    let f = kernel_profile(&m, &cfg)?;
    let sol = fixed_point_profile(&m, 0.0, 0.25, &f, &cfg)?;
    let c = f.center_index();
    let dev = sol
        .field
        .values
        .iter()
        .zip(&f.values)
        .map(|(a, b)| (a / sol.field.values[c] - b / f.values[c]).abs())
        .fold(0.0, f64::max);
    let mut out = vec![InvariantCheck::at_most(
        "n=0 reproduces the kernel",
        dev,
        1e-8 * s,
    )];
    if full {
        let ns = [0.01, 0.02, 0.04, 0.08];
        let branch = continuation(&m, &ns, 1, &cfg).map_err(|e| e.source)?;
        let pts: Vec<(f64, f64)> = branch
            .solutions
            .iter()
            .map(|p| Ok((p.n.ln(), p.field.l2_distance(&f)?.ln())))
            .collect::<Result<_>>()?;
        out.push(InvariantCheck::at_most(
            "|log-log slope - 1|",
            (fit_slope(&pts) - 1.0).abs(),
            0.2 * s,
        ));
    }
    Ok(out)
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

fn pde_invariants(full: bool, s: f64) -> Result<Vec<InvariantCheck>> {
    let base = PdeConfig {
        t_final: if full { 1.0 } else { 0.1 },
        ..PdeConfig::default()
    };
    let u0 = default_initial_data(&base)?;
    let r = run(&base.clone().with_mobility(0.05, 0.2), &u0)?;
    let mut out = vec![
        InvariantCheck::at_most("mass drift", r.checks.mass_drift, 1e-10 * s),
        InvariantCheck::at_most(
            "energy balance defect",
            r.checks.energy_balance_defect,
            0.02 * s,
        ),
    ];
    if full {
        let conv = biharmonic_convergence(
            &PdeConfig {
                t_final: 0.1,
                ..base
            },
            &u0,
            &[4e-3, 2e-3, 1e-3, 5e-4],
        )?;
        let order = conv.orders.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(InvariantCheck::at_least(
            "time order (max norm)",
            order,
            1.0,
        ));
    }
    Ok(out)
}

fn holder_ladder(_: bool, _: f64) -> Result<Vec<InvariantCheck>> {
    let cfg = PdeConfig::degenerate();
    let rep = holder_report(&run(&cfg, &default_initial_data(&cfg)?)?)?;
    Ok(vec![InvariantCheck::at_least(
        "temporal Hölder exponent",
        rep.temporal_exponent,
        0.125 - 0.02,
    )])
}

fn homotopy_schedule(_: bool, _: f64) -> Result<Vec<InvariantCheck>> {
    let base = PdeConfig::default();
    let u0 = default_initial_data(&base)?;
    let eps = [1e-1, 1e-2, 1e-3];
    let good = limit_study(&schedule_sqrt_log(&eps), &u0, 0.5, &base, 1)?;
    let bad = limit_study(&schedule_log_squared(&eps), &u0, 0.5, &base, 1)?;
    Ok(vec![
        InvariantCheck::flag("sqrt-log schedule converges", good.strictly_decreasing),
        InvariantCheck::flag("log-squared schedule stalls", !bad.strictly_decreasing),
    ])
}

pub fn verify(o: &VerifyOpts, jobs: usize) -> Result<Outcome> {
    let full = !o.quick;
    let picked: Vec<&(&str, bool, Check)> = SUITE.iter().filter(|c| full || c.1).collect();
    let results = crate::par::map(&picked, jobs, |(_, _, f)| f(full, o.tol))?;
    let mut stdout = vec![format!(
        "{:<24} {:<38} {:>24} {:>24}  result",
        "criterion", "check", "value", "limit"
    )];
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for ((name, _, _), group) in picked.iter().zip(results) {
        for c in group {
            stdout.push(format!(
                "{:<24} {:<38} {:>24} {:>24}  {}",
                name,
                c.name,
                fmt_f64(c.value),
                fmt_f64(c.limit),
                if c.pass { "PASS" } else { "FAIL" }
            ));
            rows.push(json!({ "criterion": name, "check": c.name, "value": c.value, "limit": c.limit, "pass": c.pass }));
            checks.push(InvariantCheck {
                name: format!("{name}: {}", c.name),
                ..c
            });
        }
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    stdout.push(format!("{passed}/{} checks passed", checks.len()));
    Ok(Outcome {
        results: Results {
            report: Some(json!({ "quick": o.quick, "rows": rows })),
            tables: Vec::new(),
        },
        checks,
        notes: Vec::new(),
        stdout,
    })
}
