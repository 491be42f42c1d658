//! Self-similar profiles `u = t^{-alpha} f(y / t^beta)` of the thin film
//! equation for small `n`, one-dimensional.
//!
//! The profile equation `-(|f|^n f''')' + beta y f' + alpha f = 0` is written as
//! `L f + N(f) = 0` with the linear part `L = -D^4 + beta y D + alpha` and
//! `N(f) = ((1 - |f|^n) f''')'`. Along the mass law `alpha = N/(4 + N n)` the
//! operator `L` annihilates a rescaled kernel, so the fixed-point map is
//! pinned by the normalization `f(0) = delta0` instead of being inverted
//! outright.

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};
use crate::kernel::{check_decay_envelope, EnvelopeReport, KernelModel, KernelTerm};
use crate::poly::MultiIndex;
use crate::spectral::EigenPairSet;

/// `(alpha, beta) = (N/(4+Nn), 1/(4+Nn))`, the exponents that conserve mass.
pub fn alpha_mass(dim: usize, n: f64) -> Result<(f64, f64)> {
    let d = 4.0 + dim as f64 * n;
    if !(d > 0.0) {
        return Err(Error::config(format!("4 + N n = {d} must be positive")));
    }
    Ok((dim as f64 / d, 1.0 / d))
}

/// First-order law `alpha_k(n) = (k + N)/4 + mu n`.
pub fn alpha_expansion(k: u32, dim: usize, n: f64, mu1k: f64) -> f64 {
    (k as f64 + dim as f64) / 4.0 + mu1k * n
}

/// `beta = (1 - n alpha)/4`.
pub fn beta_exponent(n: f64, alpha: f64) -> f64 {
    (1.0 - n * alpha) / 4.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub half_width: f64,
    pub spacing: f64,
    /// Damping in `f <- (1 - theta) f + theta G(f)`.
    pub theta: f64,
    /// Regularization in `|f|^n ~ (f^2 + eta^2)^{n/2}`.
    pub eta: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Normalization `f(0)`; `None` means `F(0)`.
    pub delta0: Option<f64>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            half_width: 40.0,
            spacing: 0.05,
            theta: 0.5,
            eta: 1e-8,
            tol: 1e-9,
            max_sweeps: 500,
            delta0: None,
        }
    }
}

impl ProfileConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::line(self.half_width, self.spacing)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::config(format!(
                "damping theta = {} outside (0, 1]",
                self.theta
            )));
        }
        if !(self.eta > 0.0) || !(self.tol > 0.0) || self.max_sweeps == 0 {
            return Err(Error::config("eta, tol and max_sweeps must be positive"));
        }
        if let Some(d) = self.delta0 {
            if !(d > 0.0) {
                return Err(Error::config(format!("delta0 = {d} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub n: f64,
    pub alpha: f64,
    pub beta_exp: f64,
    pub field: SampledField,
    pub iterations: usize,
    /// Max of the discrete profile-equation residual away from sign changes.
    pub residual: f64,
    pub normalization: f64,
    pub theta: f64,
    pub eta: f64,
    /// Whether `alpha` sits on the mass law, so the kernel direction was pinned.
    pub pinned: bool,
    /// `h * sum` of the right side, which the pinned row has to absorb.
    pub solvability_defect: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationField {
    pub level: u32,
    pub field: SampledField,
    pub mu_used: f64,
    /// `<N0(psi0), 1>` relative to the size of its two contributions.
    pub orthogonality_defect: f64,
    /// `|| B Phi + P N0(psi0) ||_2` on the grid.
    pub residual: f64,
}

/// Second-difference stencils with zero ghost values outside the grid.
struct Stencil {
    h: f64,
    y: Vec<f64>,
}

impl Stencil {
    fn new(grid: &GridSpec) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Unsupported {
                what: "profile dimension",
                value: grid.dim().to_string(),
            });
        }
        let y = (0..grid.len()).map(|i| grid.point(i)[0]).collect();
        Ok(Stencil {
            h: grid.spacing(),
            y,
        })
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    fn at(f: &[f64], i: isize) -> f64 {
        if i < 0 || i as usize >= f.len() {
            0.0
        } else {
            f[i as usize]
        }
    }

    /// `f'''` at `y_{i+1/2}`, for `i = -1 ..= len - 1`.
    fn d3_half(&self, f: &[f64], i: isize) -> f64 {
        (Self::at(f, i + 2) - 3.0 * Self::at(f, i + 1) + 3.0 * Self::at(f, i) - Self::at(f, i - 1))
            / self.h.powi(3)
    }

    /// `(c f''')'` in flux form, `c` given at nodes and averaged to half points.
    fn flux_divergence(&self, coef: impl Fn(f64) -> f64, f: &[f64]) -> Vec<f64> {
        let n = self.len() as isize;
        let c: Vec<f64> = f.iter().map(|&v| coef(v)).collect();
        let c0 = coef(0.0);
        let ch = |i: isize| {
            let a = if i < 0 { c0 } else { c[i as usize] };
            let b = if i + 1 >= n { c0 } else { c[(i + 1) as usize] };
            0.5 * (a + b)
        };
        let q: Vec<f64> = (-1..n).map(|i| ch(i) * self.d3_half(f, i)).collect();
        (0..self.len())
            .map(|i| (q[i + 1] - q[i]) / self.h)
            .collect()
    }

    /// `-D^4 + beta y D + alpha` as a pentadiagonal matrix.
    fn operator(&self, alpha: f64, beta: f64) -> BandedMatrix {
        let n = self.len();
        let h4 = self.h.powi(4);
        let mut m = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for (o, w) in [(-2isize, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)] {
                let j = i as isize + o;
                if j >= 0 && (j as usize) < n {
                    m.add(i, j as usize, -w / h4);
                }
            }
            let adv = beta * self.y[i] / (2.0 * self.h);
            if i + 1 < n {
                m.add(i, i + 1, adv);
            }
            if i > 0 {
                m.add(i, i - 1, -adv);
            }
            m.add(i, i, alpha);
        }
        m
    }

    fn apply(&self, m: &BandedMatrix, f: &[f64]) -> Vec<f64> {
        m.mul_vec(f)
    }
}

/// Factored linear part, optionally with the kernel direction pinned at `center`.
struct LinearPart {
    full: BandedMatrix,
    lu: BandedLu,
    center: Option<usize>,
}

impl LinearPart {
    fn new(st: &Stencil, alpha: f64, beta: f64, center: Option<usize>) -> Result<Self> {
        let full = st.operator(alpha, beta);
        let mut m = full.clone();
        if let Some(c) = center {
            m.clear_row(c);
            m.set(c, c, 1.0);
        }
        let lu = m.factor()?;
        let ratio = lu.pivot_ratio();
        if ratio < 1e-13 {
            return Err(Error::Singular(format!(
                "profile operator is near-singular at alpha = {alpha} (pivot ratio {ratio:e})"
            )));
        }
        Ok(LinearPart { full, lu, center })
    }

    /// Solves `L v = r`, with `v(center) = pin` when pinned.
    fn solve(&self, r: &[f64], pin: f64) -> Vec<f64> {
        let mut b = r.to_vec();
        if let Some(c) = self.center {
            b[c] = pin;
        }
        self.lu.solve_in_place(&mut b);
        b
    }
}

fn mobility_gap(n: f64, eta: f64) -> impl Fn(f64) -> f64 {
    move |v: f64| 1.0 - (v * v + eta * eta).powf(0.5 * n)
}

/// Indices within two cells of a sign change of `f`.
fn near_sign_change(f: &[f64]) -> Vec<bool> {
    let mut mask = vec![false; f.len()];
    for i in 0..f.len().saturating_sub(1) {
        if f[i] * f[i + 1] <= 0.0 {
            for j in i.saturating_sub(2)..=(i + 3).min(f.len() - 1) {
                mask[j] = true;
            }
        }
    }
    mask
}

fn kernel_terms(model: &KernelModel, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let d0 = MultiIndex::zero(1);
    let f = model.sample_terms(
        &[KernelTerm {
            beta: d0.clone(),
            coeff: 1.0,
            multiplier: None,
        }],
        grid,
    )?;
    let yf = model.sample_terms(
        &[KernelTerm {
            beta: MultiIndex::unit(1, 0),
            coeff: 1.0,
            multiplier: Some(0),
        }],
        grid,
    )?;
    Ok((f, yf))
}

fn check_model(model: &KernelModel) -> Result<()> {
    if model.dim() != 1 || model.order() != 2 {
        return Err(Error::Unsupported {
            what: "profile kernel (only N = 1, m = 2)",
            value: format!("N = {}, m = {}", model.dim(), model.order()),
        });
    }
    Ok(())
}

/// Damped fixed-point iteration for `f = -L^{-1} N(n, f)` normalized by `f(0) = delta0`.
///
/// `f` is split as `s F + v` with `s = delta0 / F(0)`. `L F` is applied exactly
/// from kernel derivatives, so the finite-difference operator only acts on the
/// correction `v` and `n = 0` returns `F` itself.
pub fn fixed_point_profile(
    model: &KernelModel,
    n: f64,
    alpha: f64,
    init: &SampledField,
    cfg: &ProfileConfig,
) -> Result<ProfileSolution> {
    check_model(model)?;
    cfg.validate()?;
    if !(0.0..=0.5).contains(&n) {
        return Err(Error::config(format!("n = {n} outside [0, 0.5]")));
    }
    let grid = init.grid.clone();
    let st = Stencil::new(&grid)?;
    let center = init.center_index();
    let (kf, kyf) = kernel_terms(model, &grid)?;
    let f0 = kf[center];
    let delta0 = cfg.delta0.unwrap_or(f0);
    let s = delta0 / f0;
    if init.values[center].abs() < 1e-300 {
        return Err(Error::config("initial profile vanishes at the origin"));
    }

    let beta = beta_exponent(n, alpha);
    let (mass_alpha, _) = alpha_mass(1, n)?;
    let pinned = (alpha - mass_alpha).abs() <= 1e-12 * mass_alpha.abs().max(1.0);
    let lin = LinearPart::new(&st, alpha, beta, pinned.then_some(center))?;
    // L F = (beta - 1/4) y F' + (alpha - 1/4) F, because B F = 0.
    let lf: Vec<f64> = kf
        .iter()
        .zip(&kyf)
        .map(|(f, yf)| s * ((beta - 0.25) * yf + (alpha - 0.25) * f))
        .collect();
    let gap = mobility_gap(n, cfg.eta);
    let h = st.h;

    let mut f: Vec<f64> = init
        .values
        .iter()
        .map(|v| v * delta0 / init.values[center])
        .collect();
    let mut last = f64::INFINITY;
    let mut defect = 0.0;
    for sweep in 1..=cfg.max_sweeps {
        let nf = if n == 0.0 {
            vec![0.0; f.len()]
        } else {
            st.flux_divergence(&gap, &f)
        };
        let rhs: Vec<f64> = nf.iter().zip(&lf).map(|(a, b)| -a - b).collect();
        defect = h * rhs.iter().sum::<f64>();
        let v = lin.solve(&rhs, 0.0);
        let mut g: Vec<f64> = kf.iter().zip(&v).map(|(k, v)| s * k + v).collect();
        if !pinned {
            let gc = g[center];
            if gc.abs() < 1e-300 {
                return Err(Error::Divergence {
                    what: "profile iteration",
                    detail: "f(0) collapsed to zero".into(),
                });
            }
            g.iter_mut().for_each(|x| *x *= delta0 / gc);
        }
        let mut next: Vec<f64> = f
            .iter()
            .zip(&g)
            .map(|(a, b)| (1.0 - cfg.theta) * a + cfg.theta * b)
            .collect();
        let c = next[center];
        next.iter_mut().for_each(|x| *x *= delta0 / c);
        let change = (h * next
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>())
        .sqrt();
        let norm = (h * next.iter().map(|a| a * a).sum::<f64>()).sqrt();
        if !norm.is_finite() || norm > 1e3 {
            return Err(Error::Divergence {
                what: "profile iteration",
                detail: format!("iterate norm {norm:e}"),
            });
        }
        f = next;
        last = change;
        if change < cfg.tol {
            let residual = profile_residual(&st, &lin, &f, &kf, s, &lf, &gap, n);
            return Ok(ProfileSolution {
                n,
                alpha,
                beta_exp: beta,
                field: SampledField::new(grid, f)?,
                iterations: sweep,
                residual,
                normalization: delta0,
                theta: cfg.theta,
                eta: cfg.eta,
                pinned,
                solvability_defect: defect,
            });
        }
    }
    let _ = defect;
    Err(Error::NoConvergence {
        what: "profile fixed point",
        iterations: cfg.max_sweeps,
        last,
    })
}

/// `max |L_h v + N_h(f) + s L F|` away from sign changes, with `v = f - s F`.
#[allow(clippy::too_many_arguments)]
fn profile_residual(
    st: &Stencil,
    lin: &LinearPart,
    f: &[f64],
    kf: &[f64],
    s: f64,
    lf: &[f64],
    gap: &impl Fn(f64) -> f64,
    n: f64,
) -> f64 {
    let v: Vec<f64> = f.iter().zip(kf).map(|(a, k)| a - s * k).collect();
    let lv = st.apply(&lin.full, &v);
    let nf = if n == 0.0 {
        vec![0.0; f.len()]
    } else {
        st.flux_divergence(gap, f)
    };
    let mask = near_sign_change(f);
    (0..f.len())
        .filter(|&i| !mask[i])
        .map(|i| (lv[i] + nf[i] + lf[i]).abs())
        .fold(0.0, f64::max)
}

/// `F` on the default profile grid, the `n = 0` starting point.
pub fn kernel_profile(model: &KernelModel, cfg: &ProfileConfig) -> Result<SampledField> {
    check_model(model)?;
    let grid = cfg.grid()?;
    let (f, _) = kernel_terms(model, &grid)?;
    SampledField::new(grid, f)
}

/// Solves `B Phi = -N0(psi0)` on the eigenpair grid with `<Phi, 1> = 0`.
///
/// `N0(f) = -(ln|f| f''')' - (alpha0/4) y f' + mu f`; the log is regularized
/// with `eta` like the profile mobility.
pub fn solve_perturbation_k0(
    model: &KernelModel,
    pairs: &EigenPairSet,
    mu10: f64,
    eta: f64,
) -> Result<PerturbationField> {
    check_model(model)?;
    let grid = pairs.grid().clone();
    let st = Stencil::new(&grid)?;
    let zero = MultiIndex::zero(1);
    let psi = pairs.psi(&zero)?;
    let (_, yf) = kernel_terms(model, &grid)?;
    let h = st.h;
    let alpha0 = 0.25;
    let logterm = st.flux_divergence(|v| 0.5 * (v * v + eta * eta).ln(), &psi.values);
    // -N0(psi0)
    let rhs: Vec<f64> = (0..st.len())
        .map(|i| logterm[i] + alpha0 / 4.0 * yf[i] - mu10 * psi.values[i])
        .collect();
    let mass = h * psi.values.iter().sum::<f64>();
    let drift = alpha0 / 4.0 * h * yf.iter().sum::<f64>();
    let scale = drift.abs() + (mu10 * mass).abs();
    let defect = (h * rhs.iter().sum::<f64>()).abs() / scale;
    if defect > 1e-2 {
        return Err(Error::Invariant(format!(
            "<N0(psi0), 1> = {:e} relative; mu = {mu10} is inconsistent",
            defect
        )));
    }
    let projected: Vec<f64> = {
        let c = h * rhs.iter().sum::<f64>() / mass;
        rhs.iter()
            .zip(&psi.values)
            .map(|(r, p)| r - c * p)
            .collect()
    };

    let center = psi.center_index();
    let lin = LinearPart::new(&st, alpha0, 0.25, Some(center))?;
    // Discrete kernel of B_h, used to move the solution into Y0 without
    // spoiling the discrete residual.
    let kh = lin.solve(&vec![0.0; st.len()], psi.values[center]);
    let raw = lin.solve(&projected, 0.0);
    let c = raw.iter().sum::<f64>() / kh.iter().sum::<f64>();
    let phi: Vec<f64> = raw.iter().zip(&kh).map(|(r, k)| r - c * k).collect();
    let bphi = st.apply(&lin.full, &phi);
    let residual = (h * bphi
        .iter()
        .zip(&projected)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>())
    .sqrt();
    Ok(PerturbationField {
        level: 0,
        field: SampledField::new(grid, phi)?,
        mu_used: mu10,
        orthogonality_defect: defect,
        residual,
    })
}

/// Fit of `(f_n - F f_n(0)/F(0)) / n ~ s Phi + c F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderCheck {
    pub scale: f64,
    pub kernel_shift: f64,
    /// Misfit relative to the norm of the scaled difference.
    pub relative_defect: f64,
}

pub fn first_order_check(
    sol: &ProfileSolution,
    kernel: &SampledField,
    pert: &PerturbationField,
) -> Result<FirstOrderCheck> {
    sol.field.check_same_grid(kernel)?;
    sol.field.check_same_grid(&pert.field)?;
    if sol.n <= 0.0 {
        return Err(Error::config("first-order check needs n > 0"));
    }
    let c = kernel.center_index();
    let ratio = sol.field.values[c] / kernel.values[c];
    let d: Vec<f64> = sol
        .field
        .values
        .iter()
        .zip(&kernel.values)
        .map(|(f, k)| (f - ratio * k) / sol.n)
        .collect();
    let (p, k) = (&pert.field.values, &kernel.values);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (pp, pk, kk) = (dot(p, p), dot(p, k), dot(k, k));
    let (dp, dk) = (dot(&d, p), dot(&d, k));
    let det = pp * kk - pk * pk;
    if det.abs() < 1e-300 {
        return Err(Error::Singular(
            "perturbation field parallel to the kernel".into(),
        ));
    }
    let s = (dp * kk - dk * pk) / det;
    let t = (pp * dk - pk * dp) / det;
    let mis: f64 = d
        .iter()
        .zip(p.iter().zip(k))
        .map(|(d, (p, k))| (d - s * p - t * k).powi(2))
        .sum();
    Ok(FirstOrderCheck {
        scale: s,
        kernel_shift: t,
        relative_defect: (mis / dot(&d, &d)).sqrt(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileBranch {
    pub dim: usize,
    pub solutions: Vec<ProfileSolution>,
    /// `|| f_{j+1} - f_j ||_2`.
    pub increments: Vec<f64>,
}

impl ProfileBranch {
    /// Largest `increment / (dn ||F||_2)` along the branch.
    pub fn increment_ratio(&self, kernel_norm: f64) -> f64 {
        self.increments
            .iter()
            .zip(self.solutions.windows(2))
            .map(|(inc, w)| inc / ((w[1].n - w[0].n) * kernel_norm))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, ThisError)]
#[error("continuation stopped after {} solutions: {source}", partial.solutions.len())]
pub struct ContinuationFailure {
    pub partial: ProfileBranch,
    #[source]
    pub source: Error,
}

/// Warm-started sweep along increasing `n` with `alpha` from the mass law.
pub fn continuation(
    model: &KernelModel,
    n_grid: &[f64],
    dim: usize,
    cfg: &ProfileConfig,
) -> std::result::Result<ProfileBranch, ContinuationFailure> {
    let mut branch = ProfileBranch {
        dim,
        solutions: Vec::new(),
        increments: Vec::new(),
    };
    let fail = |branch: ProfileBranch, e: Error| ContinuationFailure {
        partial: branch,
        source: e,
    };
    if dim != 1 {
        return Err(fail(
            branch,
            Error::Unsupported {
                what: "profile dimension",
                value: dim.to_string(),
            },
        ));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid.first().is_some_and(|&n| n < 0.0) {
        return Err(fail(
            branch,
            Error::config("n grid must increase from a non-negative start"),
        ));
    }
    let mut start = match kernel_profile(model, cfg) {
        Ok(f) => f,
        Err(e) => return Err(fail(branch, e)),
    };
    for &n in n_grid {
        let step = alpha_mass(dim, n)
            .and_then(|(alpha, _)| fixed_point_profile(model, n, alpha, &start, cfg));
        match step {
            Ok(sol) => {
                if let Some(prev) = branch.solutions.last() {
                    branch
                        .increments
                        .push(sol.field.l2_distance(&prev.field).expect("same grid"));
                }
                start = sol.field.clone();
                branch.solutions.push(sol);
            }
            Err(e) => return Err(fail(branch, e)),
        }
    }
    Ok(branch)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OscillationReport {
    pub n: f64,
    /// Interpolated zeros on `y > 0` whose neighbouring lobes clear the floor.
    pub sign_changes: Vec<f64>,
    /// `(position, max |f|)` of each lobe on `y > 0`, innermost first.
    pub lobe_amplitudes: Vec<(f64, f64)>,
    pub envelope_monotone: bool,
    /// Consecutive zero spacings and their ratios.
    pub spacings: Vec<f64>,
    pub spacing_ratios: Vec<f64>,
    /// Tail fit of `|f| ~ D exp(-d |y|^{4/3})`, if enough lobes were found.
    pub envelope: Option<EnvelopeReport>,
    /// `[3/n] - 1`, the regularity count quoted for the interface; `None` at `n = 0`.
    pub regularity_index: Option<i64>,
    pub floor: f64,
}

pub fn oscillation_report(sol: &ProfileSolution) -> OscillationReport {
    oscillation_report_of(&sol.field, sol.n)
}

/// Same diagnostic for any sampled 1D profile.
pub fn oscillation_report_of(field: &SampledField, n: f64) -> OscillationReport {
    let floor = 1e-13 * field.max_abs();
    let pts: Vec<(f64, f64)> = (0..field.len())
        .map(|i| (field.grid.point(i)[0], field.values[i]))
        .filter(|p| p.0 >= 0.0)
        .collect();
    let mut lobes: Vec<(f64, f64)> = Vec::new();
    let mut zeros = Vec::new();
    let mut cur = (0.0, 0.0f64);
    for w in pts.windows(2) {
        let ((y0, a), (y1, b)) = (w[0], w[1]);
        if a.abs() > cur.1 {
            cur = (y0, a.abs());
        }
        if a * b < 0.0 {
            lobes.push(cur);
            zeros.push(y0 + (y1 - y0) * a / (a - b));
            cur = (y1, 0.0);
        }
    }
    // Keep zeros between lobes that are both above the noise floor.
    let mut kept = Vec::new();
    let mut amps = Vec::new();
    for (i, z) in zeros.iter().enumerate() {
        let next = lobes.get(i + 1).map(|l| l.1).unwrap_or(cur.1);
        if lobes[i].1 > floor && next > floor {
            kept.push(*z);
        } else {
            break;
        }
    }
    for l in lobes.iter().take(kept.len() + 1) {
        amps.push(*l);
    }
    let spacings: Vec<f64> = kept.windows(2).map(|w| w[1] - w[0]).collect();
    let spacing_ratios = spacings.windows(2).map(|w| w[1] / w[0]).collect();
    let envelope_monotone = amps.windows(2).all(|w| w[1].1 < w[0].1);
    let regularity_index = (n > 0.0).then(|| (3.0 / n).floor() as i64 - 1);
    OscillationReport {
        n,
        sign_changes: kept,
        lobe_amplitudes: amps,
        envelope_monotone,
        spacings,
        spacing_ratios,
        envelope: check_decay_envelope(field).ok(),
        regularity_index,
        floor,
    }
}
