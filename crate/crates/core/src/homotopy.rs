//! The epsilon-regularized family `u_t = -(phi_eps(u) u_xxx)_x` on a periodic
//! line, with the bookkeeping needed for the energy identity, Holder moduli
//! and the joint limit `eps, n -> 0`.
//!
//! Stepping is linearly implicit: the mobility is frozen at the old state and
//! `(I + dt A(u_old)) u_new = u_old` is solved with a cyclic pentadiagonal
//! system. `A = D^- phi D^+ Lap_h` is in flux form, so mass telescopes, and
//! the discrete energy satisfies
//! `E(u_new) + dt sum phi |D^+ Lap_h u_new|^2 h + (1/2)|D^+ (u_new - u_old)|^2_h = E(u_old)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::banded::CyclicBanded;
use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec, SampledField};

/// `eps^n + (1 - eps)(eps^2 + u^2)^{n/2}`; at least `eps^n`, and `1` at `eps = 1`.
pub fn phi_eps(u: f64, eps: f64, n: f64) -> f64 {
    eps.powf(n) + (1.0 - eps) * (eps * eps + u * u).powf(0.5 * n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    pub eps: f64,
    pub n: f64,
    pub domain_half_width: f64,
    pub cells: usize,
    pub dt_initial: f64,
    pub t_final: f64,
    pub boundary: Boundary,
    /// Upper bound for the adaptive step.
    pub dt_max: f64,
    /// Halve `dt` once on energy growth beyond this relative amount; `false` keeps `dt` fixed.
    pub adaptive: bool,
    pub energy_tol: f64,
    /// Snapshots at `t_final 2^{-k}`, `k < ladder`, plus `t = 0`.
    pub ladder: usize,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            eps: 1.0,
            n: 0.0,
            domain_half_width: 10.0,
            cells: 512,
            dt_initial: 1e-6,
            t_final: 1.0,
            boundary: Boundary::Periodic,
            dt_max: 1e-3,
            adaptive: true,
            energy_tol: 1e-12,
            ladder: 20,
        }
    }
}

impl PdeConfig {
    /// Default grid with `eps = 1e-3`, `n = 1`: the degenerate reference run.
    pub fn degenerate() -> Self {
        PdeConfig::default().with_mobility(1e-3, 1.0)
    }

    pub fn with_mobility(mut self, eps: f64, n: f64) -> Self {
        self.eps = eps;
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::config(format!("eps = {} outside (0, 1]", self.eps)));
        }
        if !(self.n >= 0.0) {
            return Err(Error::config(format!(
                "n = {} must be non-negative",
                self.n
            )));
        }
        if self.cells < 64 {
            return Err(Error::config(format!(
                "{} cells, need at least 64",
                self.cells
            )));
        }
        if !(self.dt_initial > 0.0 && self.dt_max >= self.dt_initial) {
            return Err(Error::config("need 0 < dt_initial <= dt_max"));
        }
        if !(self.t_final > 0.0 && self.domain_half_width > 0.0) {
            return Err(Error::config(
                "t_final and domain half-width must be positive",
            ));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.domain_half_width / self.cells as f64
    }

    /// Cell-centred periodic grid on `[-L, L)`.
    pub fn grid(&self) -> Result<GridSpec> {
        let h = self.spacing();
        Ok(GridSpec::Uniform1d(Axis::new(
            -self.domain_half_width + 0.5 * h,
            h,
            self.cells,
        )?))
    }

    /// Sorted snapshot times including `0` and `t_final`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = (0..self.ladder.max(1))
            .map(|k| self.t_final * 0.5f64.powi(k as i32))
            .collect();
        t.push(0.0);
        t.sort_by(f64::total_cmp);
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeState {
    pub time: f64,
    pub values: Vec<f64>,
}

impl PdeState {
    pub fn new(time: f64, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(PdeState { time, values })
    }
}

/// Per-step quantities of the energy identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub dt: f64,
    /// `dt sum phi |D^+ Lap_h u_new|^2 h`.
    pub dissipation: f64,
    /// `(1/2) |D^+ (u_new - u_old)|^2_h`, the implicit-Euler energy loss.
    pub numerical_dissipation: f64,
    /// `dt sum |phi D^+ Lap_h u_new|^2 h`.
    pub flux_sq: f64,
    pub min_phi: f64,
    pub max_phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub numerical_dissipation: f64,
    pub flux_sq: f64,
    pub min_phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunChecks {
    /// `max_t |M(t) - M(0)| / max(1, |M(0)|)`.
    pub mass_drift: f64,
    /// `|E(T) + D(T) - E(0)| / E(0)` with `D` the physical dissipation only.
    pub energy_balance_defect: f64,
    pub energy_non_increasing: bool,
    /// `min phi / eps^n`, at least 1 when parabolicity holds.
    pub parabolicity_margin: f64,
    /// `sup_t (1/2) int |u_x|^2`.
    pub energy_bound: f64,
    /// `int int phi |u_xxx|^2`.
    pub dissipation_bound: f64,
    /// `int int |h_eps|^2`.
    pub flux_sq: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PdeRun {
    pub config: PdeConfig,
    pub grid: GridSpec,
    pub snapshots: Vec<PdeState>,
    pub diagnostics: Vec<Diagnostics>,
    pub checks: RunChecks,
    pub steps: usize,
    pub rejected: usize,
}

fn check_state(state: &PdeState, cfg: &PdeConfig) -> Result<()> {
    if state.values.len() != cfg.cells {
        return Err(Error::GridMismatch(format!(
            "{} values for {} cells",
            state.values.len(),
            cfg.cells
        )));
    }
    Ok(())
}

fn laplacian(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) / (h * h))
        .collect()
}

/// `D^+ w` at `i + 1/2`.
fn forward(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len();
    (0..n).map(|i| (w[(i + 1) % n] - w[i]) / h).collect()
}

pub fn mass(u: &[f64], h: f64) -> f64 {
    h * u.iter().sum::<f64>()
}

/// `(1/2) sum |D^+ u|^2 h`.
pub fn gradient_energy(u: &[f64], h: f64) -> f64 {
    0.5 * h * forward(u, h).iter().map(|g| g * g).sum::<f64>()
}

fn half_mobility(u: &[f64], cfg: &PdeConfig) -> Vec<f64> {
    let n = u.len();
    let p: Vec<f64> = u.iter().map(|&v| phi_eps(v, cfg.eps, cfg.n)).collect();
    (0..n).map(|i| 0.5 * (p[i] + p[(i + 1) % n])).collect()
}

/// One linearly implicit step with mobility frozen at `state`.
pub fn step(state: &PdeState, cfg: &PdeConfig, dt: f64) -> Result<(PdeState, StepInfo)> {
    check_state(state, cfg)?;
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step {dt} must be positive")));
    }
    let h = cfg.spacing();
    let u = &state.values;
    let n = u.len();
    let phi = half_mobility(u, cfg);
    let h4 = h.powi(4);
    let mut m = CyclicBanded::new(n, 2)?;
    for i in 0..n {
        let a = dt * phi[i] / h4;
        let b = dt * phi[(i + n - 1) % n] / h4;
        m.add(i, 2, a);
        m.add(i, 1, -3.0 * a - b);
        m.add(i, 0, 1.0 + 3.0 * a + 3.0 * b);
        m.add(i, -1, -a - 3.0 * b);
        m.add(i, -2, b);
    }
    let next = m.solve(u)?;
    if next.iter().any(|v| !v.is_finite() || v.abs() > 1e6) {
        return Err(Error::Divergence {
            what: "PDE step",
            detail: format!("|u| above 1e6 at t = {}", state.time + dt),
        });
    }
    let g = forward(&laplacian(&next, h), h);
    let dissipation = dt * h * g.iter().zip(&phi).map(|(g, p)| p * g * g).sum::<f64>();
    let flux_sq = dt
        * h
        * g.iter()
            .zip(&phi)
            .map(|(g, p)| (p * g).powi(2))
            .sum::<f64>();
    let du: Vec<f64> = next.iter().zip(u).map(|(a, b)| a - b).collect();
    let numerical_dissipation = gradient_energy(&du, h);
    let (min_phi, max_phi) = u
        .iter()
        .map(|&v| phi_eps(v, cfg.eps, cfg.n))
        .fold((f64::MAX, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    Ok((
        PdeState::new(state.time + dt, next)?,
        StepInfo {
            dt,
            dissipation,
            numerical_dissipation,
            flux_sq,
            min_phi,
            max_phi,
        },
    ))
}

/// Called after every accepted step with the old and new state.
pub trait StepObserver {
    fn observe(&mut self, old: &PdeState, new: &PdeState, info: &StepInfo);
}

impl StepObserver for () {
    fn observe(&mut self, _: &PdeState, _: &PdeState, _: &StepInfo) {}
}

pub fn run(cfg: &PdeConfig, u0: &SampledField) -> Result<PdeRun> {
    run_observed(cfg, u0, &mut ())
}

/// Adaptive run to `t_final`, landing exactly on every snapshot time.
pub fn run_observed(
    cfg: &PdeConfig,
    u0: &SampledField,
    obs: &mut impl StepObserver,
) -> Result<PdeRun> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    if u0.grid != grid {
        return Err(Error::GridMismatch(
            "initial data is not on the periodic PDE grid".into(),
        ));
    }
    let h = cfg.spacing();
    let edge = u0.values[0].abs().max(u0.values[u0.len() - 1].abs());
    if edge > 1e-12 * u0.max_abs().max(1e-300) {
        return Err(Error::SupportAtBoundary { value: edge });
    }
    let mut state = PdeState::new(0.0, u0.values.clone())?;
    let m0 = mass(&state.values, h);
    let e0 = gradient_energy(&state.values, h);
    let floor = cfg.eps.powf(cfg.n);
    let mut diag = vec![Diagnostics {
        time: 0.0,
        mass: m0,
        energy: e0,
        dissipation: 0.0,
        numerical_dissipation: 0.0,
        flux_sq: 0.0,
        min_phi: state
            .values
            .iter()
            .map(|&v| phi_eps(v, cfg.eps, cfg.n))
            .fold(f64::MAX, f64::min),
    }];
    let mut snapshots = vec![state.clone()];
    let (mut dissipation, mut numerical, mut flux) = (0.0, 0.0, 0.0);
    let mut min_phi = diag[0].min_phi;
    let mut dt = cfg.dt_initial;
    let (mut clean, mut steps, mut rejected) = (0usize, 0usize, 0usize);
    let mut monotone = true;
    let mut energy = e0;
    for &target in cfg.snapshot_times().iter().filter(|&&t| t > 0.0) {
        while state.time < target {
            let last = target - state.time <= dt * (1.0 + 1e-12);
            let this_dt = if last { target - state.time } else { dt };
            let (mut next, info) = step(&state, cfg, this_dt)?;
            let e = gradient_energy(&next.values, h);
            if cfg.adaptive && e > energy * (1.0 + cfg.energy_tol) + 1e-300 {
                rejected += 1;
                dt *= 0.5;
                clean = 0;
                if dt < 1e-14 {
                    return Err(Error::NoConvergence {
                        what: "adaptive time step",
                        iterations: steps,
                        last: dt,
                    });
                }
                continue;
            }
            monotone &= e <= energy * (1.0 + 1e-12) + 1e-300;
            if last {
                next.time = target;
            }
            obs.observe(&state, &next, &info);
            steps += 1;
            dissipation += info.dissipation;
            numerical += info.numerical_dissipation;
            flux += info.flux_sq;
            min_phi = min_phi.min(info.min_phi);
            energy = e;
            state = next;
            diag.push(Diagnostics {
                time: state.time,
                mass: mass(&state.values, h),
                energy,
                dissipation,
                numerical_dissipation: numerical,
                flux_sq: flux,
                min_phi: info.min_phi,
            });
            if cfg.adaptive && !last {
                clean += 1;
                if clean >= 10 {
                    dt = (2.0 * dt).min(cfg.dt_max);
                    clean = 0;
                }
            }
        }
        snapshots.push(state.clone());
    }
    let mass_drift =
        diag.iter().map(|d| (d.mass - m0).abs()).fold(0.0, f64::max) / m0.abs().max(1.0);
    let checks = RunChecks {
        mass_drift,
        energy_balance_defect: (energy + dissipation - e0).abs() / e0.max(1e-300),
        energy_non_increasing: monotone,
        parabolicity_margin: min_phi / floor,
        energy_bound: e0.max(diag.iter().map(|d| d.energy).fold(0.0, f64::max)),
        dissipation_bound: dissipation,
        flux_sq: flux,
    };
    Ok(PdeRun {
        config: cfg.clone(),
        grid,
        snapshots,
        diagnostics: diag,
        checks,
        steps,
        rejected,
    })
}

impl PdeRun {
    pub fn final_state(&self) -> &PdeState {
        self.snapshots
            .last()
            .expect("a run has at least the initial snapshot")
    }

    pub fn field_at(&self, k: usize) -> Result<SampledField> {
        let s = self
            .snapshots
            .get(k)
            .ok_or_else(|| Error::config(format!("no snapshot {k}")))?;
        SampledField::new(self.grid.clone(), s.values.clone())
    }
}

/// Mass-one smooth bump on the periodic grid of `cfg`.
pub fn default_initial_data(cfg: &PdeConfig) -> Result<SampledField> {
    crate::semigroup::unit_bump(&cfg.grid()?)
}

/// Symbol of the space-discrete operator, or the continuum `xi^4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symbol {
    Continuum,
    Discrete,
}

/// Exact bi-harmonic evolution `e^{-lambda(xi) t}` of periodic data by FFT.
pub fn biharmonic_reference(u0: &[f64], half_width: f64, t: f64, symbol: Symbol) -> Vec<f64> {
    let n = u0.len();
    let h = 2.0 * half_width / n as f64;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = u0.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        let xi = PI * kk / half_width;
        let lambda = match symbol {
            Symbol::Continuum => xi.powi(4),
            Symbol::Discrete => (4.0 / (h * h) * (0.5 * xi * h).sin().powi(2)).powi(2),
        };
        *c *= (-lambda * t).exp();
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

fn l2(a: &[f64], b: &[f64], h: f64) -> f64 {
    (h * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// `sup_x |u - U|` at `t_final`.
    pub errors: Vec<f64>,
    /// `log(e(dt_j) / e(dt_{j+1})) / log(dt_j / dt_{j+1})` in the max norm.
    pub orders: Vec<f64>,
    pub l2_errors: Vec<f64>,
    pub l2_orders: Vec<f64>,
}

/// Fixed-step `eps = 1` runs against the exact semi-discrete solution.
pub fn biharmonic_convergence(
    cfg: &PdeConfig,
    u0: &SampledField,
    dts: &[f64],
) -> Result<ConvergenceReport> {
    if cfg.eps != 1.0 {
        return Err(Error::config(
            "dt convergence needs eps = 1 (constant mobility)",
        ));
    }
    let h = cfg.spacing();
    let exact = biharmonic_reference(
        &u0.values,
        cfg.domain_half_width,
        cfg.t_final,
        Symbol::Discrete,
    );
    let (mut errors, mut l2_errors) = (Vec::new(), Vec::new());
    for &dt in dts {
        let c = PdeConfig {
            dt_initial: dt,
            dt_max: dt,
            adaptive: false,
            ladder: 1,
            ..cfg.clone()
        };
        let r = run(&c, u0)?;
        let u = &r.final_state().values;
        errors.push(
            u.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        l2_errors.push(l2(u, &exact, h));
    }
    let order = |e: &[f64]| -> Vec<f64> {
        e.windows(2)
            .zip(dts.windows(2))
            .map(|(e, d)| (e[0] / e[1]).ln() / (d[0] / d[1]).ln())
            .collect()
    };
    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        orders: order(&errors),
        l2_orders: order(&l2_errors),
        errors,
        l2_errors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `(t, sup_x |u(x, t) - u(x, 0)|)` over the ladder.
    pub increments: Vec<(f64, f64)>,
    pub temporal_exponent: f64,
    /// `max |u(x1) - u(x2)| / |x1 - x2|^{1/2}` over all snapshots.
    pub spatial_half_modulus: f64,
}

pub fn holder_report(run: &PdeRun) -> Result<HolderReport> {
    if run.snapshots.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "{} snapshots, need 20",
            run.snapshots.len()
        )));
    }
    let u0 = &run.snapshots[0].values;
    let increments: Vec<(f64, f64)> = run.snapshots[1..]
        .iter()
        .map(|s| {
            (
                s.time,
                s.values
                    .iter()
                    .zip(u0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            )
        })
        .filter(|p| p.1 > 0.0)
        .collect();
    if increments.len() < 3 {
        return Err(Error::InsufficientData(
            "fewer than 3 non-zero increments".into(),
        ));
    }
    let x: Vec<f64> = increments.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = increments.iter().map(|p| p.1.ln()).collect();
    let temporal_exponent = slope(&x, &y);
    let h = run.config.spacing();
    let spatial_half_modulus = run
        .snapshots
        .iter()
        .map(|s| half_modulus(&s.values, h))
        .fold(0.0, f64::max);
    Ok(HolderReport {
        increments,
        temporal_exponent,
        spatial_half_modulus,
    })
}

fn half_modulus(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut best = 0.0f64;
    for k in 1..=n / 2 {
        let d = (k as f64 * h).sqrt();
        for i in 0..n {
            best = best.max((u[(i + k) % n] - u[i]).abs() / d);
        }
    }
    best
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Eight smooth bumps `exp(-1/(1 - z^2))`, `z = (x - c)/w`, fixed for all runs.
pub const TEST_BUMPS: [(f64, f64); 8] = [
    (-3.0, 1.5),
    (-2.0, 1.0),
    (-1.0, 0.8),
    (-0.4, 1.2),
    (0.0, 2.0),
    (0.7, 0.9),
    (1.5, 1.3),
    (2.5, 1.8),
];

fn test_bump(x: f64, c: f64, w: f64) -> f64 {
    let z = (x - c) / w;
    if z.abs() < 1.0 {
        (-1.0 / (1.0 - z * z)).exp()
    } else {
        0.0
    }
}

/// Accumulates `int_0^T int D^+psi . D^+ Lap u` for each test bump.
struct WeakForm {
    h: f64,
    grads: Vec<Vec<f64>>,
    flux_terms: Vec<f64>,
}

impl StepObserver for WeakForm {
    fn observe(&mut self, _: &PdeState, new: &PdeState, info: &StepInfo) {
        let g = forward(&laplacian(&new.values, self.h), self.h);
        for (acc, dpsi) in self.flux_terms.iter_mut().zip(&self.grads) {
            *acc += info.dt * self.h * dpsi.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub eps: f64,
    pub n: f64,
    /// `eps^{n/2}`.
    pub eps_pow: f64,
    /// `|| u_eps(t) - U(t) ||_2` against the continuum bi-harmonic solution.
    pub distance: f64,
    /// Largest `|int psi (u(T) - u(0)) - int int D psi . D Lap u|` over the battery.
    pub weak_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitStudy {
    pub t_eval: f64,
    pub rows: Vec<LimitRow>,
    pub strictly_decreasing: bool,
}

/// `n(eps) = 1/sqrt|ln eps|`, satisfying `eps^{n/2} -> 0`.
pub fn schedule_sqrt_log(eps: &[f64]) -> Vec<(f64, f64)> {
    eps.iter()
        .map(|&e| (e, 1.0 / e.ln().abs().sqrt()))
        .collect()
}

/// `n(eps) = 1/|ln eps|^2`, for which `eps^{n/2} -> 1`.
pub fn schedule_log_squared(eps: &[f64]) -> Vec<(f64, f64)> {
    eps.iter().map(|&e| (e, 1.0 / e.ln().powi(2))).collect()
}

/// Runs each `(eps, n)` to `t_eval`, up to `jobs` at a time.
pub fn limit_study(
    schedule: &[(f64, f64)],
    u0: &SampledField,
    t_eval: f64,
    base: &PdeConfig,
    jobs: usize,
) -> Result<LimitStudy> {
    if schedule.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::config("schedule must have decreasing eps"));
    }
    let rows = crate::par::map(schedule, jobs, |&(eps, n)| {
        limit_row(eps, n, u0, t_eval, base)
    })?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    Ok(LimitStudy {
        t_eval,
        rows,
        strictly_decreasing,
    })
}

fn limit_row(
    eps: f64,
    n: f64,
    u0: &SampledField,
    t_eval: f64,
    base: &PdeConfig,
) -> Result<LimitRow> {
    let cfg = PdeConfig {
        eps,
        n,
        t_final: t_eval,
        ladder: 1,
        ..base.clone()
    };
    let h = cfg.spacing();
    let xs: Vec<f64> = (0..cfg.cells)
        .map(|i| cfg.grid().map(|g| g.point(i)[0]))
        .collect::<Result<_>>()?;
    let psis: Vec<Vec<f64>> = TEST_BUMPS
        .iter()
        .map(|&(c, w)| xs.iter().map(|&x| test_bump(x, c, w)).collect())
        .collect();
    let mut weak = WeakForm {
        h,
        grads: psis.iter().map(|p| forward(p, h)).collect(),
        flux_terms: vec![0.0; psis.len()],
    };
    let r = run_observed(&cfg, u0, &mut weak)?;
    let fin = &r.final_state().values;
    let weak_residual = psis
        .iter()
        .zip(&weak.flux_terms)
        .map(|(p, f)| {
            (h * p
                .iter()
                .zip(fin.iter().zip(&u0.values))
                .map(|(p, (a, b))| p * (a - b))
                .sum::<f64>()
                - f)
                .abs()
        })
        .fold(0.0, f64::max);
    let exact = biharmonic_reference(&u0.values, cfg.domain_half_width, t_eval, Symbol::Continuum);
    Ok(LimitRow {
        eps,
        n,
        eps_pow: (0.5 * n * eps.ln()).exp(),
        distance: l2(fin, &exact, h),
        weak_residual,
    })
}
