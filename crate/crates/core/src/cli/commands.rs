//! One pipeline per subcommand. Each returns tables and a report for the
//! writer, plus the invariant checks that decide the exit code.

use serde_json::{json, Value};

use super::config::{
    BranchOpts, EigenOpts, EvolveOpts, HomotopyOpts, KernelOpts, ProfileOpts, Schedule,
};
use super::emit::{InvariantCheck, Results, Table};
use crate::branching::{
    assemble_dipole, assemble_k0, assemble_triple, solve_dipole, solve_triple, SingularQuadConfig,
    SolveOptions, NONDEGENERACY_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};
use crate::homotopy::{
    default_initial_data, limit_study, run, schedule_log_squared, schedule_sqrt_log,
};
use crate::kernel::{eval_kernel, kernel_mass, KernelConfig, KernelModel};
use crate::profile::{alpha_mass, continuation, kernel_profile, oscillation_report};
use crate::semigroup::{compare, evolve_convolution, evolve_expansion, unit_bump};
use crate::spectral::{
    apply_b, eigen_residual, gram_matrix, sample_polynomial, EigenPairSet, GramQuadrature,
};

/// What a pipeline hands back to the dispatcher.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Results,
    pub checks: Vec<InvariantCheck>,
    pub notes: Vec<String>,
    /// Lines for stdout, printed after the outputs are written.
    pub stdout: Vec<String>,
}

/// Kernel model whose radial table (2D) covers the whole grid.
pub fn model_for(
    dim: usize,
    order: u32,
    grid: &GridSpec,
    max_deriv: Option<u32>,
) -> Result<KernelModel> {
    let mut cfg = KernelConfig::new(dim, order);
    if dim == 2 {
        cfg.radial_extent = cfg.radial_extent.max(grid.max_radius().ceil());
    }
    if let Some(d) = max_deriv {
        cfg.max_deriv = cfg.max_deriv.max(d);
    }
    KernelModel::new(cfg)
}

/// Column-per-field table over the grid coordinates.
fn field_table(name: &str, fields: &[(String, &SampledField)]) -> Result<Table> {
    let grid = &fields
        .first()
        .ok_or_else(|| Error::InsufficientData("no fields".into()))?
        .1
        .grid;
    let mut cols: Vec<String> = if grid.dim() == 1 {
        vec!["y".into()]
    } else {
        vec!["y1".into(), "y2".into()]
    };
    cols.extend(fields.iter().map(|(n, _)| n.clone()));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(name, &col_refs);
    for i in 0..grid.len() {
        let p = grid.point(i);
        let mut row = if grid.dim() == 1 {
            vec![p[0]]
        } else {
            vec![p[0], p[1]]
        };
        for (_, f) in fields {
            f.check_same_grid(fields[0].1)?;
            row.push(f.values[i]);
        }
        t.push(row);
    }
    Ok(t)
}

/// The grid row closest to `y2 = 0` of a 2D table, as `y1` against the fields.
fn center_slice(full: &Table, grid: &GridSpec) -> Table {
    let (nx, mid) = match grid {
        GridSpec::Tensor2d { x, y } => (x.len, y.len / 2),
        _ => return full.clone(),
    };
    let mut cols: Vec<&str> = vec!["y1"];
    cols.extend(full.columns[2..].iter().map(String::as_str));
    let mut t = Table::new("slice", &cols);
    for r in &full.rows[mid * nx..(mid + 1) * nx] {
        let mut row = vec![r[0]];
        row.extend_from_slice(&r[2..]);
        t.push(row);
    }
    t
}

fn tables_for(name: &str, fields: &[(String, &SampledField)]) -> Result<Vec<Table>> {
    let mut full = field_table(name, fields)?;
    if fields[0].1.dim() == 1 {
        return Ok(vec![full]);
    }
    let slice = center_slice(&full, &fields[0].1.grid);
    full.plottable = false;
    Ok(vec![full, slice])
}

fn index_label(prefix: &str, beta: &crate::poly::MultiIndex) -> String {
    let parts: Vec<String> = beta.components().iter().map(|c| c.to_string()).collect();
    format!("{prefix}_{}", parts.join("_"))
}

pub fn kernel(o: &KernelOpts) -> Result<Outcome> {
    let grid = o.grid()?;
    let m = model_for(o.dim, o.order, &grid, None)?;
    let f = eval_kernel(&m, &grid)?;
    let mass = kernel_mass(&m)?;
    let residual = apply_b(&m, &f)?.max_abs();
    let tables = tables_for("kernel", &[("F".into(), &f)])?;
    Ok(Outcome {
        results: Results {
            report: None,
            tables,
        },
        checks: vec![
            InvariantCheck::at_most("kernel_mass_defect", (mass - 1.0).abs(), o.tol),
            InvariantCheck::at_most("bf_residual_max", residual, o.residual_tol),
        ],
        notes: vec![format!(
            "int F = {} by frequency-side quadrature; grid sum over [-L, L] = {}",
            super::emit::fmt_f64(mass),
            super::emit::fmt_f64(f.integrate())
        )],
        stdout: Vec::new(),
    })
}

pub fn eigen(o: &EigenOpts, jobs: usize) -> Result<Outcome> {
    let grid = o.grid()?;
    let m = model_for(o.dim, o.order, &grid, Some(o.max_order + 2))?;
    let pairs = EigenPairSet::build(&m, o.max_order, &grid)?;
    let gram = gram_matrix(&pairs, &GramQuadrature::default())?;
    let radius = 0.5 * grid.half_width();
    let residuals = crate::par::map(&pairs.indices, jobs, |b| {
        eigen_residual(&m, &pairs, b, radius)
    })?;
    let adjoints: Vec<SampledField> = pairs
        .indices
        .iter()
        .map(|b| sample_polynomial(pairs.adjoint(b)?, &grid))
        .collect::<Result<_>>()?;
    let mut psi_cols = Vec::new();
    let mut adj_cols = Vec::new();
    for (b, a) in pairs.indices.iter().zip(&adjoints) {
        psi_cols.push((index_label("psi", b), pairs.psi(b)?));
        adj_cols.push((index_label("adj", b), a));
    }
    let mut tables = tables_for("psi", &psi_cols)?;
    for mut t in tables_for("adjoint", &adj_cols)? {
        if t.name == "slice" {
            t.name = "adjoint_slice".into();
        }
        tables.push(t);
    }
    if let Some(t) = tables.iter_mut().find(|t| t.name == "slice") {
        t.name = "psi_slice".into();
    }
    let labels: Vec<String> = pairs.indices.iter().map(|b| b.to_string()).collect();
    let report = json!({
        "indices": labels,
        "eigenvalues": pairs.indices.iter().map(|b| (b.to_string(), Value::from(pairs.eigenvalues[b].to_string()))).collect::<serde_json::Map<_, _>>(),
        "gram": { "entries": gram.entries, "identity_error": gram.identity_error(), "drift": gram.drift, "resolved": gram.resolved },
        "eigen_residuals": labels.iter().cloned().zip(residuals.iter().map(|r| Value::from(*r))).collect::<serde_json::Map<_, _>>(),
        "residual_radius": radius,
    });
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        results: Results {
            report: Some(report),
            tables,
        },
        checks: vec![
            InvariantCheck::at_most("gram_identity_error", gram.identity_error(), o.tol),
            InvariantCheck::flag("gram_quadrature_resolved", gram.resolved),
        ],
        notes: vec![format!(
            "max |B psi - lambda psi| for |y| <= {radius} is {}",
            super::emit::fmt_f64(worst)
        )],
        stdout: Vec::new(),
    })
}

pub fn evolve(o: &EvolveOpts, jobs: usize) -> Result<Outcome> {
    let grid = o.grid()?;
    let m = model_for(1, o.order, &grid, None)?;
    let u = unit_bump(&grid)?;
    let pairs = EigenPairSet::build(&m, o.truncation, &grid)?;
    let runs = crate::par::map(&o.taus, jobs, |&tau| {
        let a = evolve_expansion(&pairs, &u, tau, o.truncation)?;
        let b = evolve_convolution(&m, &u, tau)?;
        let cmp = compare(&a, &b, tau, o.truncation)?;
        Ok((a, b, cmp))
    })?;
    let mut cols = vec![("u0".to_string(), &u)];
    for (k, (a, b, _)) in runs.iter().enumerate() {
        cols.push((format!("expansion_{k}"), a));
        cols.push((format!("convolution_{k}"), b));
    }
    let tables = tables_for("evolve", &cols)?;
    let m0 = u.integrate();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (k, (_, b, cmp)) in runs.iter().enumerate() {
        checks.push(InvariantCheck::at_most(
            &format!("l2_gap_tau_{k}"),
            cmp.l2_error,
            o.tol,
        ));
        checks.push(InvariantCheck::at_most(
            &format!("mass_change_tau_{k}"),
            ((b.integrate() - m0) / m0).abs(),
            o.mass_tol,
        ));
        rows.push(serde_json::to_value(cmp)?);
    }
    let report = json!({ "taus": o.taus, "comparisons": rows, "initial_mass": m0 });
    Ok(Outcome {
        results: Results {
            report: Some(report),
            tables,
        },
        checks,
        ..Outcome::default()
    })
}

pub fn branch(o: &BranchOpts) -> Result<Outcome> {
    let grid = o.grid()?;
    let m = model_for(o.dim, 2, &grid, None)?;
    let quad = SingularQuadConfig {
        exclusion_radius: o.exclusion_radius,
        extrapolation_levels: o.extrapolation_levels,
    };
    let tol = o.tol.unwrap_or(0.02);
    let pairs = EigenPairSet::build(&m, o.level, &grid)?;
    let opts = SolveOptions {
        newton_tol: o.newton_tol,
        lattice: o.lattice.unwrap_or(20),
        continuum_tol: o.continuum_tol,
        ..SolveOptions::default()
    };
    let fmt = super::emit::fmt_f64;
    match o.level {
        0 => {
            let r = assemble_k0(&m, &pairs, &quad)?;
            let zero = crate::poly::MultiIndex::zero(o.dim).to_string();
            let report = json!({
                "level": 0,
                "coefficients": { "alpha0": r.alpha0, "g00": r.g00, "pairing": r.pairing, "log_term": r.log_term },
                "roots": [ { "coefficients": { zero: 1.0 }, "mu_first": r.mu_first } ],
                "residuals": { "oracle": r.oracle, "relative_error": r.relative_error },
                "flags": { "within_tol": r.relative_error <= tol },
            });
            Ok(Outcome {
                results: Results {
                    report: Some(report),
                    tables: Vec::new(),
                },
                checks: vec![InvariantCheck::at_most(
                    "mu_relative_error",
                    r.relative_error,
                    tol,
                )],
                notes: Vec::new(),
                stdout: vec![
                    format!("mu_1,0        = {}", fmt(r.mu_first)),
                    format!("-N^2/16       = {}", fmt(r.oracle)),
                    format!("relative error = {}", fmt(r.relative_error)),
                ],
            })
        }
        1 => {
            let sys = assemble_dipole(&m, &pairs, &quad)?;
            let rep = solve_dipole(&sys, &opts)?;
            let res: Vec<f64> = rep.solutions.iter().map(|s| s.residual).collect();
            let worst = res.iter().cloned().fold(0.0, f64::max);
            let report = json!({
                "level": 1,
                "coefficients": rep.coefficients,
                "roots": rep.solutions,
                "residuals": { "roots": res, "omega_sup": rep.omega_sup, "log_term_sup": rep.log_term_sup },
                "flags": {
                    "structure": rep.structure,
                    "root_count": rep.root_count,
                    "conditions": rep.conditions,
                    "perturbation_controlled": rep.perturbation_controlled,
                    "warnings": rep.warnings,
                },
            });
            let c = &rep.coefficients;
            let mut stdout = vec![format!(
                "structure {:?}, roots {:?} (predicted {:?})",
                rep.structure, rep.root_count, rep.conditions.predicted
            )];
            stdout.extend(
                rep.solutions
                    .iter()
                    .map(|s| format!("  c = {:?}  mu_1,1 = {}", s.coefficients, fmt(s.mu_first))),
            );
            Ok(Outcome {
                results: Results {
                    report: Some(report),
                    tables: Vec::new(),
                },
                checks: vec![
                    InvariantCheck::at_most(
                        "diagonal_swap_defect",
                        c.diagonal_swap_defect.abs(),
                        1e-10,
                    ),
                    InvariantCheck::at_most("cross_swap_defect", c.cross_swap_defect.abs(), 1e-10),
                    InvariantCheck::flag(
                        "root_count_matches_conditions",
                        rep.root_count == rep.conditions.predicted,
                    ),
                    InvariantCheck::at_most("root_residual_max", worst, tol),
                ],
                notes: Vec::new(),
                stdout,
            })
        }
        _ => {
            let sys = assemble_triple(&m, &pairs, &quad)?;
            let rep = solve_triple(&sys, &opts)?;
            let res: Vec<f64> = rep.solutions.iter().map(|s| s.residual).collect();
            let worst = res.iter().cloned().fold(0.0, f64::max);
            let report = json!({
                "level": 2,
                "coefficients": rep.coefficients,
                "roots": rep.solutions,
                "residuals": { "roots": res, "omega_sup": rep.omega_sup, "jacobian_ratios": rep.jacobian_ratios },
                "flags": {
                    "structure": rep.structure,
                    "root_count": rep.root_count,
                    "degenerate": rep.degenerate,
                    "expectation_met": rep.expectation_met,
                    "perturbation_controlled": rep.perturbation_controlled,
                    "conic_intersections": rep.conic_intersections,
                    "spurious": rep.spurious,
                    "warnings": rep.warnings,
                },
            });
            let mut stdout = vec![format!(
                "structure {:?}, {} roots",
                rep.structure, rep.root_count
            )];
            stdout.extend(
                rep.solutions
                    .iter()
                    .map(|s| format!("  c = {:?}  mu_1,2 = {}", s.coefficients, fmt(s.mu_first))),
            );
            Ok(Outcome {
                results: Results {
                    report: Some(report),
                    tables: Vec::new(),
                },
                checks: vec![
                    InvariantCheck::at_least(
                        "nondegeneracy",
                        sys.nondegeneracy.abs(),
                        NONDEGENERACY_THRESHOLD,
                    ),
                    InvariantCheck::at_most("root_residual_max", worst, tol),
                ],
                notes: Vec::new(),
                stdout,
            })
        }
    }
}

pub fn profile(o: &ProfileOpts) -> Result<Outcome> {
    let cfg = o.profile_config()?;
    let m = KernelModel::standard(1, 2)?;
    let f = kernel_profile(&m, &cfg)?;
    let branch = continuation(&m, &o.ns, 1, &cfg).map_err(|e| e.source)?;
    let mut cols = vec![("F".to_string(), &f)];
    for s in &branch.solutions {
        cols.push((format!("f_{}", s.n), &s.field));
    }
    let tables = tables_for("profile", &cols)?;
    let mut identity = 0.0f64;
    let mut law = 0.0f64;
    let mut sols = Vec::new();
    for s in &branch.solutions {
        identity = identity.max((s.n * s.alpha + 4.0 * s.beta_exp - 1.0).abs());
        law = law.max((s.alpha - alpha_mass(1, s.n)?.0).abs());
        let osc = oscillation_report(s);
        sols.push(json!({
            "n": s.n,
            "alpha": s.alpha,
            "beta": s.beta_exp,
            "iterations": s.iterations,
            "residual": s.residual,
            "pinned": s.pinned,
            "distance_to_kernel": s.field.l2_distance(&f)?,
            "sign_changes": osc.sign_changes,
            "envelope_monotone": osc.envelope_monotone,
            "regularity_index": osc.regularity_index,
        }));
    }
    let ratio = branch.increment_ratio(f.l2_norm());
    let report =
        json!({ "solutions": sols, "increments": branch.increments, "increment_ratio": ratio });
    Ok(Outcome {
        results: Results {
            report: Some(report),
            tables,
        },
        checks: vec![
            InvariantCheck::at_most("exponent_identity", identity, 1e-12),
            InvariantCheck::at_most("mass_law_alpha", law, 1e-12),
            InvariantCheck::at_most("increment_ratio", ratio, o.increment_ratio_max),
        ],
        notes: vec!["profiles are computed in one dimension".into()],
        stdout: Vec::new(),
    })
}

pub fn homotopy(o: &HomotopyOpts, jobs: usize) -> Result<Outcome> {
    let cfg = o.pde_config()?;
    let u0 = default_initial_data(&cfg)?;
    let r = run(&cfg, &u0)?;
    let fields: Vec<SampledField> = (0..r.snapshots.len())
        .map(|k| r.field_at(k))
        .collect::<Result<_>>()?;
    let cols: Vec<(String, &SampledField)> = fields
        .iter()
        .enumerate()
        .map(|(k, f)| (format!("u{k}"), f))
        .collect();
    let mut snap = field_table("snapshots", &cols)?;
    snap.columns[0] = "x".into();
    let mut diag = Table::new(
        "diagnostics",
        &[
            "time",
            "mass",
            "energy",
            "dissipation",
            "numerical_dissipation",
            "flux_sq",
            "min_phi",
        ],
    );
    for d in &r.diagnostics {
        diag.push(vec![
            d.time,
            d.mass,
            d.energy,
            d.dissipation,
            d.numerical_dissipation,
            d.flux_sq,
            d.min_phi,
        ]);
    }
    let mut tables = vec![snap, diag];
    let c = &r.checks;
    let mut checks = vec![
        InvariantCheck::at_most("mass_drift", c.mass_drift, o.mass_tol),
        InvariantCheck::at_most("energy_balance_defect", c.energy_balance_defect, o.tol),
        InvariantCheck::flag("energy_non_increasing", c.energy_non_increasing),
        InvariantCheck::at_least("parabolicity_margin", c.parabolicity_margin, 1.0),
    ];
    let mut report = json!({
        "snapshot_times": r.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
        "checks": c,
        "steps": r.steps,
        "rejected": r.rejected,
    });
    if let Some(s) = o.limit {
        let sched = match s {
            Schedule::SqrtLog => schedule_sqrt_log(&o.limit_eps),
            Schedule::LogSquared => schedule_log_squared(&o.limit_eps),
        };
        let study = limit_study(&sched, &u0, o.t_eval, &cfg, jobs)?;
        let mut t = Table::new(
            "limit",
            &["eps", "n", "eps_pow", "distance", "weak_residual"],
        );
        for row in &study.rows {
            t.push(vec![
                row.eps,
                row.n,
                row.eps_pow,
                row.distance,
                row.weak_residual,
            ]);
        }
        tables.push(t);
        // eps^{n/2} -> 0 should pull the regularized runs onto the continuum flow
        let expected = s == Schedule::SqrtLog;
        checks.push(InvariantCheck::flag(
            "limit_direction_matches_schedule",
            study.strictly_decreasing == expected,
        ));
        report["limit"] = json!({ "schedule": s, "t_eval": study.t_eval, "strictly_decreasing": study.strictly_decreasing });
    }
    Ok(Outcome {
        results: Results {
            report: Some(report),
            tables,
        },
        checks,
        notes: vec![format!(
            "periodic boundary on [-{0}, {0})",
            cfg.domain_half_width
        )],
        stdout: Vec::new(),
    })
}
