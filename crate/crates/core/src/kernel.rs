//! Rescaled fundamental kernel `F` of `u_t = (-1)^{m+1} Lap^m u` and its derivatives.
//!
//! `F(y) = (2 pi)^{-N} int e^{i y.xi} e^{-|xi|^{2m}} d xi`. In one dimension this
//! is a cosine integral; in two it is a Hankel transform evaluated once on a
//! radial table and interpolated. Derivatives are always taken on the Fourier
//! side.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec, SampledField};
use crate::poly::{MultiIndex, Polynomial};
use crate::quadrature::FrequencyRule;

/// Envelope exponent `d = 3 * 2^{-11/3}` of the bi-harmonic kernel tail.
pub fn envelope_exponent() -> f64 {
    3.0 * 2f64.powf(-11.0 / 3.0)
}

pub const MIN_CUTOFF: f64 = 4.0;
pub const MIN_NODES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub dim: usize,
    pub order: u32,
    pub freq_cutoff: f64,
    pub node_count: usize,
    pub max_deriv: u32,
    /// Radius covered by the cached radial table (2D only).
    pub radial_extent: f64,
    pub radial_spacing: f64,
}

impl KernelConfig {
    /// Defaults: cutoff 4 for `m = 2` and 7 for `m = 1` (so `e^{-cutoff^{2m}}`
    /// is far below rounding either way), 2048 nodes in 1D, 512 in 2D.
    pub fn new(dim: usize, order: u32) -> Self {
        KernelConfig {
            dim,
            order,
            freq_cutoff: if order == 1 { 7.0 } else { 4.0 },
            node_count: if dim == 2 { 512 } else { 2048 },
            max_deriv: if dim == 2 { 6 } else { 12 },
            radial_extent: 36.0,
            radial_spacing: 1e-3,
        }
    }

    pub fn with_max_deriv(mut self, max_deriv: u32) -> Self {
        self.max_deriv = max_deriv;
        self
    }

    pub fn with_nodes(mut self, node_count: usize) -> Self {
        self.node_count = node_count;
        self
    }

    pub fn with_radial_extent(mut self, extent: f64) -> Self {
        self.radial_extent = extent;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::Unsupported {
                what: "dimension",
                value: self.dim.to_string(),
            });
        }
        if !(1..=2).contains(&self.order) {
            return Err(Error::Unsupported {
                what: "polyharmonic order",
                value: self.order.to_string(),
            });
        }
        if !(self.freq_cutoff >= MIN_CUTOFF) {
            return Err(Error::config(format!(
                "frequency cutoff {} is under-resolved (minimum {MIN_CUTOFF})",
                self.freq_cutoff
            )));
        }
        if self.node_count < MIN_NODES {
            return Err(Error::config(format!(
                "{} frequency nodes is under-resolved (minimum {MIN_NODES})",
                self.node_count
            )));
        }
        if self.dim == 2 && !(self.radial_extent > 0.0 && self.radial_spacing > 0.0) {
            return Err(Error::config(
                "radial table needs positive extent and spacing",
            ));
        }
        Ok(())
    }
}

/// Linear combination `sum c_beta D^beta F`. Attached to sampled fields so that
/// operators can be re-applied exactly instead of by finite differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCombo {
    pub terms: Vec<(MultiIndex, f64)>,
}

impl DerivativeCombo {
    pub fn single(beta: MultiIndex, c: f64) -> Self {
        DerivativeCombo {
            terms: vec![(beta, c)],
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        DerivativeCombo {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), a * c)).collect(),
        }
    }

    pub fn add_scaled(&self, a: f64, other: &DerivativeCombo) -> Self {
        let mut terms = self.terms.clone();
        for (b, c) in &other.terms {
            match terms.iter_mut().find(|(t, _)| t == b) {
                Some(slot) => slot.1 += a * c,
                None => terms.push((b.clone(), a * c)),
            }
        }
        DerivativeCombo { terms }
    }

    pub fn max_order(&self) -> u32 {
        self.terms.iter().map(|(b, _)| b.order()).max().unwrap_or(0)
    }
}

/// One summand `coeff * [y_axis] * D^beta F(y)` of a derived expression.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTerm {
    pub beta: MultiIndex,
    pub coeff: f64,
    /// Optional multiplication by the coordinate `y_axis`.
    pub multiplier: Option<usize>,
}

#[derive(Clone, Debug)]
struct RadialTable {
    spacing: f64,
    extent: f64,
    /// `profiles[j][k] = ((1/r) d/dr)^j F` at `r = k * spacing`.
    profiles: Vec<Vec<f64>>,
}

/// Quadrature representation of `F` and `D^beta F`, immutable once built.
#[derive(Clone, Debug)]
pub struct KernelModel {
    config: KernelConfig,
    rule: FrequencyRule,
    /// `w_l e^{-xi_l^{2m}}` with the transform prefactor folded in.
    damped: Vec<f64>,
    radial: Option<RadialTable>,
    /// Lazily built value table on `|y| <= radial_extent` for 1D convolutions.
    line: OnceLock<RadialTable>,
}

/// Builds a kernel with default radial table and derivative order.
pub fn build_kernel(
    dim: usize,
    order: u32,
    freq_cutoff: f64,
    node_count: usize,
    max_deriv: u32,
) -> Result<KernelModel> {
    let mut cfg = KernelConfig::new(dim, order);
    cfg.freq_cutoff = freq_cutoff;
    cfg.node_count = node_count;
    cfg.max_deriv = max_deriv;
    KernelModel::new(cfg)
}

impl KernelModel {
    pub fn new(config: KernelConfig) -> Result<Self> {
        config.validate()?;
        let rule = FrequencyRule::new(config.freq_cutoff, config.node_count)?;
        let two_m = 2 * config.order as i32;
        let pref = if config.dim == 1 {
            1.0 / PI
        } else {
            1.0 / (2.0 * PI)
        };
        let damped = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| pref * w * (-s.powi(two_m)).exp())
            .collect();
        let mut model = KernelModel {
            config,
            rule,
            damped,
            radial: None,
            line: OnceLock::new(),
        };
        if model.config.dim == 2 {
            model.radial = Some(model.build_radial_table());
        }
        Ok(model)
    }

    /// Default-resolution kernel for `(N, m)`.
    pub fn standard(dim: usize, order: u32) -> Result<Self> {
        KernelModel::new(KernelConfig::new(dim, order))
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn order(&self) -> u32 {
        self.config.order
    }

    pub fn max_deriv(&self) -> u32 {
        self.config.max_deriv
    }

    pub fn freq_nodes(&self) -> &FrequencyRule {
        &self.rule
    }

    fn build_radial_table(&self) -> RadialTable {
        let h = self.config.radial_spacing;
        let count = (self.config.radial_extent / h).ceil() as usize + 3;
        let jmax = self.config.max_deriv as usize + 1;
        let mut profiles = vec![vec![0.0; count]; jmax];
        let mut g = vec![0.0; jmax];
        let mut spow = vec![0.0; jmax];
        for k in 0..count {
            let r = k as f64 * h;
            let mut acc = vec![0.0; jmax];
            for (&s, &wd) in self.rule.nodes.iter().zip(&self.damped) {
                bessel::scaled_jn(s * r, &mut g);
                // s^{2j+1}
                let s2 = s * s;
                spow[0] = s;
                for j in 1..jmax {
                    spow[j] = spow[j - 1] * s2;
                }
                for j in 0..jmax {
                    acc[j] += wd * spow[j] * g[j];
                }
            }
            for j in 0..jmax {
                profiles[j][k] = if j % 2 == 0 { acc[j] } else { -acc[j] };
            }
        }
        RadialTable {
            spacing: h,
            extent: (count - 3) as f64 * h,
            profiles,
        }
    }

    /// `((1/r) d/dr)^j F` at radius `r` by 5-point Lagrange interpolation.
    pub fn radial_profile(&self, j: usize, r: f64) -> Result<f64> {
        let table = self.radial.as_ref().ok_or(Error::Unsupported {
            what: "radial profile in dimension",
            value: self.config.dim.to_string(),
        })?;
        if j >= table.profiles.len() {
            return Err(Error::DerivativeOrder {
                order: j as u32,
                max: self.config.max_deriv,
            });
        }
        let mut out = [0.0];
        interp_profiles(table, r, &mut out[..], j)?;
        Ok(out[0])
    }

    /// `F(y)` from the cached table with quartic interpolation. Much cheaper
    /// than [`KernelModel::value_at`] when evaluating many shifted arguments.
    pub fn interpolated_value(&self, y: &[f64]) -> Result<f64> {
        let mut out = [0.0];
        if self.config.dim == 1 {
            let table = self.line.get_or_init(|| {
                let h = self.config.radial_spacing;
                let count = (self.config.radial_extent / h).ceil() as usize + 3;
                let mut d = [0.0];
                let prof = (0..count)
                    .map(|k| {
                        self.derivatives_1d(k as f64 * h, 0, &mut d);
                        d[0]
                    })
                    .collect();
                RadialTable {
                    spacing: h,
                    extent: (count - 3) as f64 * h,
                    profiles: vec![prof],
                }
            });
            interp_profiles(table, y[0].abs(), &mut out, 0)?;
        } else {
            let table = self.radial.as_ref().expect("2D kernel has a radial table");
            interp_profiles(table, y[0].hypot(y[1]), &mut out, 0)?;
        }
        Ok(out[0])
    }

    /// All `D^k F(y)`, `k <= kmax`, for `N = 1`.
    fn derivatives_1d(&self, y: f64, kmax: usize, out: &mut [f64]) {
        out[..=kmax].iter_mut().for_each(|v| *v = 0.0);
        for (&xi, &wd) in self.rule.nodes.iter().zip(&self.damped) {
            let (s, c) = (y * xi).sin_cos();
            // d^k/dy^k cos(y xi) = xi^k cos(y xi + k pi/2)
            let mut p = wd;
            for (k, slot) in out.iter_mut().enumerate().take(kmax + 1) {
                let phase = match k % 4 {
                    0 => c,
                    1 => -s,
                    2 => -c,
                    _ => s,
                };
                *slot += p * phase;
                p *= xi;
            }
        }
    }

    fn check_order(&self, order: u32) -> Result<()> {
        if order > self.config.max_deriv {
            return Err(Error::DerivativeOrder {
                order,
                max: self.config.max_deriv,
            });
        }
        Ok(())
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.config.dim {
            return Err(Error::GridMismatch(format!(
                "{}-dimensional grid for a {}-dimensional kernel",
                grid.dim(),
                self.config.dim
            )));
        }
        if let Some(t) = &self.radial {
            if grid.max_radius() > t.extent {
                return Err(Error::OutsideTable {
                    radius: grid.max_radius(),
                    extent: t.extent,
                });
            }
        }
        Ok(())
    }

    /// Samples `sum coeff * [y_axis] * D^beta F` on a grid.
    pub fn sample_terms(&self, terms: &[KernelTerm], grid: &GridSpec) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let kmax = terms.iter().map(|t| t.beta.order()).max().unwrap_or(0);
        self.check_order(kmax)?;
        for t in terms {
            if t.beta.dim() != self.config.dim {
                return Err(Error::GridMismatch(format!(
                    "multi-index {} has wrong dimension",
                    t.beta
                )));
            }
        }
        let kmax = kmax as usize;
        let mut out = vec![0.0; grid.len()];
        if self.config.dim == 1 {
            let mut d = vec![0.0; kmax + 1];
            for (i, slot) in out.iter_mut().enumerate() {
                let y = grid.point(i)[0];
                self.derivatives_1d(y, kmax, &mut d);
                *slot = terms
                    .iter()
                    .map(|t| {
                        let m = if t.multiplier.is_some() { y } else { 1.0 };
                        t.coeff * m * d[t.beta.order() as usize]
                    })
                    .sum();
            }
        } else {
            let table = self.radial.as_ref().expect("2D kernel has a radial table");
            let expanded: Vec<(Vec<(Polynomial, usize)>, f64, Option<usize>)> = {
                let mut cache: HashMap<MultiIndex, Vec<(Polynomial, usize)>> = HashMap::new();
                terms
                    .iter()
                    .map(|t| {
                        let e = cache
                            .entry(t.beta.clone())
                            .or_insert_with(|| radial_chain(&t.beta));
                        (e.clone(), t.coeff, t.multiplier)
                    })
                    .collect()
            };
            let mut phi = vec![0.0; kmax + 1];
            for (i, slot) in out.iter_mut().enumerate() {
                let p = grid.point(i);
                let r = p[0].hypot(p[1]);
                interp_profiles(table, r, &mut phi, 0)?;
                let mut acc = 0.0;
                for (chain, c, mult) in &expanded {
                    let mut v = 0.0;
                    for (poly, j) in chain {
                        v += poly.eval(&p) * phi[*j];
                    }
                    let m = mult.map(|a| p[a]).unwrap_or(1.0);
                    acc += c * m * v;
                }
                *slot = acc;
            }
        }
        Ok(out)
    }

    /// Samples a derivative combination and tags the field with it.
    pub fn sample(&self, combo: &DerivativeCombo, grid: &GridSpec) -> Result<SampledField> {
        let terms: Vec<KernelTerm> = combo
            .terms
            .iter()
            .map(|(b, c)| KernelTerm {
                beta: b.clone(),
                coeff: *c,
                multiplier: None,
            })
            .collect();
        let values = self.sample_terms(&terms, grid)?;
        Ok(SampledField::new(grid.clone(), values)?.with_origin(combo.clone()))
    }

    /// `D^beta F` at a single point.
    pub fn derivative_at(&self, beta: &MultiIndex, y: &[f64]) -> Result<f64> {
        self.check_order(beta.order())?;
        if self.config.dim == 1 {
            let k = beta.order() as usize;
            let mut d = vec![0.0; k + 1];
            self.derivatives_1d(y[0], k, &mut d);
            Ok(d[k])
        } else {
            let table = self.radial.as_ref().expect("2D kernel has a radial table");
            let p = [y[0], y[1]];
            let r = p[0].hypot(p[1]);
            let mut phi = vec![0.0; beta.order() as usize + 1];
            interp_profiles(table, r, &mut phi, 0)?;
            Ok(radial_chain(beta)
                .iter()
                .map(|(poly, j)| poly.eval(&p) * phi[*j])
                .sum())
        }
    }

    pub fn value_at(&self, y: &[f64]) -> Result<f64> {
        self.derivative_at(&MultiIndex::zero(self.config.dim), y)
    }

    /// `(-1)^{m+1} Lap^m` as a list of `(coefficient, multi-index)` pairs.
    pub fn laplacian_power(&self) -> Vec<(f64, MultiIndex)> {
        let m = self.config.order;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        MultiIndex::of_order(self.config.dim, m)
            .into_iter()
            .map(|g| {
                let mult = (1..=m as u64).product::<u64>() as f64 / g.factorial();
                let doubled = g.plus(&g);
                (sign * mult, doubled)
            })
            .collect()
    }
}

/// Cartesian derivative `D^beta` of a radial function as `sum_j P_j(y) Phi_j(r)`,
/// using `d_i (P Phi_j) = (d_i P) Phi_j + y_i P Phi_{j+1}`.
pub fn radial_chain(beta: &MultiIndex) -> Vec<(Polynomial, usize)> {
    let dim = beta.dim();
    let mut terms: Vec<(Polynomial, usize)> = vec![(Polynomial::constant(dim, 1.0), 0)];
    for (axis, &count) in beta.components().iter().enumerate() {
        for _ in 0..count {
            let mut next: Vec<(Polynomial, usize)> = Vec::new();
            let mut push = |p: Polynomial, j: usize| {
                if p.is_zero() {
                    return;
                }
                match next.iter_mut().find(|(_, k)| *k == j) {
                    Some(slot) => slot.0 = slot.0.add(&p),
                    None => next.push((p, j)),
                }
            };
            for (p, j) in &terms {
                push(p.partial(axis), *j);
                let yi = Polynomial::monomial(MultiIndex::unit(dim, axis), 1.0);
                push(multiply(&yi, p), j + 1);
            }
            terms = next;
        }
    }
    terms
}

fn multiply(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(a.dim());
    for (ka, ca) in a.terms() {
        for (kb, cb) in b.terms() {
            out.add_term(ka.plus(kb), ca * cb);
        }
    }
    out
}

/// Interpolates profiles `first..first+out.len()` at radius `r`.
fn interp_profiles(table: &RadialTable, r: f64, out: &mut [f64], first: usize) -> Result<()> {
    if !(r <= table.extent) {
        return Err(Error::OutsideTable {
            radius: r,
            extent: table.extent,
        });
    }
    let x = r / table.spacing;
    let base = (x.round() as isize).max(0);
    let t = x - base as f64;
    // Lagrange weights on nodes base-2..base+2, t in [-0.5, 0.5]
    let w = [
        (t + 1.0) * t * (t - 1.0) * (t - 2.0) / 24.0,
        -(t + 2.0) * t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 2.0) * (t + 1.0) * (t - 1.0) * (t - 2.0) / 4.0,
        -(t + 2.0) * (t + 1.0) * t * (t - 2.0) / 6.0,
        (t + 2.0) * (t + 1.0) * t * (t - 1.0) / 24.0,
    ];
    for (o, slot) in out.iter_mut().enumerate() {
        let prof = &table.profiles[first + o];
        let mut v = 0.0;
        for (q, wq) in w.iter().enumerate() {
            // profiles are even in r
            let idx = (base + q as isize - 2).unsigned_abs();
            v += wq * prof[idx];
        }
        *slot = v;
    }
    Ok(())
}

/// Samples `F` on a grid.
pub fn eval_kernel(model: &KernelModel, grid: &GridSpec) -> Result<SampledField> {
    model.sample(
        &DerivativeCombo::single(MultiIndex::zero(model.dim()), 1.0),
        grid,
    )
}

/// Samples `D^beta F` on a grid.
pub fn eval_derivative(
    model: &KernelModel,
    beta: &MultiIndex,
    grid: &GridSpec,
) -> Result<SampledField> {
    model.sample(&DerivativeCombo::single(beta.clone(), 1.0), grid)
}

/// `int F`: trapezoid on a wide line in 1D, Simpson on the radial table in 2D.
pub fn kernel_mass(model: &KernelModel) -> Result<f64> {
    if model.dim() == 1 {
        let grid = GridSpec::line(40.0, 0.05)?;
        Ok(eval_kernel(model, &grid)?.integrate())
    } else {
        let t = model.radial.as_ref().expect("2D kernel has a radial table");
        let count = t.profiles[0].len() - 2;
        let axis = Axis::new(0.0, t.spacing, count)?;
        let f = SampledField::new(GridSpec::Radial(axis), t.profiles[0][..count].to_vec())?;
        Ok(f.integrate())
    }
}

/// Fit of `|f| <= D exp(-d |y|^{4/3})` over the tail of a sampled kernel.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub fitted_D: f64,
    pub fitted_d: f64,
    /// Largest `ln|f| - ln D + d |y|^{4/3}` over the fitted samples, clamped at 0.
    pub residual: f64,
    /// RMS misfit of the 4/3-power law in log space.
    pub rms_four_thirds: f64,
    /// RMS misfit of a Gaussian-type `|y|^2` law in log space.
    pub rms_quadratic: f64,
    /// Samples used: tail extrema for oscillatory data, all tail points otherwise.
    pub samples: usize,
    pub oscillatory: bool,
    /// The quadratic law fits at least as well as the 4/3 law.
    pub law_mismatch: bool,
}

const TAIL_START: f64 = 3.0;

pub fn check_decay_envelope(field: &SampledField) -> Result<EnvelopeReport> {
    if field.half_width() < 10.0 {
        return Err(Error::InsufficientData(format!(
            "envelope fit needs |y| extent >= 10, got {}",
            field.half_width()
        )));
    }
    let peak = field.max_abs();
    let floor = 1e-12 * peak;
    let n = field.len();
    let radius = |i: usize| {
        let p = field.grid.point(i);
        p[0].hypot(p[1])
    };
    let v = &field.values;
    let mut extrema: Vec<(f64, f64)> = Vec::new();
    let mut sign_changes = 0;
    for i in 1..n.saturating_sub(1) {
        if v[i] * v[i + 1] < 0.0 && radius(i) >= TAIL_START {
            sign_changes += 1;
        }
        let a = v[i].abs();
        if radius(i) >= TAIL_START && a > floor && a >= v[i - 1].abs() && a > v[i + 1].abs() {
            extrema.push((radius(i), a));
        }
    }
    let oscillatory = sign_changes >= 2 && extrema.len() >= 3;
    let samples: Vec<(f64, f64)> = if oscillatory {
        extrema
    } else {
        (0..n)
            .filter(|&i| radius(i) >= TAIL_START && v[i].abs() > floor)
            .map(|i| (radius(i), v[i].abs()))
            .collect()
    };
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} tail extrema, need 3",
            samples.len()
        )));
    }
    let logs: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let x43: Vec<f64> = samples.iter().map(|s| s.0.powf(4.0 / 3.0)).collect();
    let x2: Vec<f64> = samples.iter().map(|s| s.0 * s.0).collect();
    let (a43, b43, rms43) = line_fit(&x43, &logs);
    let (_, _, rms2) = line_fit(&x2, &logs);
    let d = -b43;
    let residual = x43
        .iter()
        .zip(&logs)
        .map(|(x, l)| l - (a43 + b43 * x))
        .fold(0.0f64, f64::max);
    Ok(EnvelopeReport {
        fitted_D: a43.exp(),
        fitted_d: d,
        residual,
        rms_four_thirds: rms43,
        rms_quadratic: rms2,
        samples: samples.len(),
        oscillatory,
        law_mismatch: rms2 <= rms43,
    })
}

/// Least squares `y = a + b x`; returns `(a, b, rms)`.
pub(crate) fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(u, v)| (v - a - b * u).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (a, b, rms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_5_4() -> f64 {
        0.906_402_477_055_477
    }

    #[test]
    fn rejects_unsupported_configs() {
        assert!(matches!(
            build_kernel(3, 2, 4.0, 256, 4),
            Err(Error::Unsupported { .. })
        ));
        assert!(matches!(
            build_kernel(1, 3, 4.0, 256, 4),
            Err(Error::Unsupported { .. })
        ));
        assert!(matches!(
            build_kernel(1, 2, 3.0, 256, 4),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_kernel(1, 2, 4.0, 128, 4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn value_at_origin_1d() {
        let m = KernelModel::standard(1, 2).unwrap();
        let f0 = m.value_at(&[0.0]).unwrap();
        assert!((f0 - gamma_5_4() / PI).abs() < 1e-14);
        let g = KernelModel::standard(1, 1).unwrap();
        assert!((g.value_at(&[0.0]).unwrap() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-14);
        let want = (-1.0f64).exp() / (4.0 * PI).sqrt();
        assert!((g.value_at(&[2.0]).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn first_derivative_vanishes_at_origin() {
        let m = KernelModel::standard(1, 2).unwrap();
        assert!(
            m.derivative_at(&MultiIndex::new(vec![1]), &[0.0])
                .unwrap()
                .abs()
                < 1e-16
        );
    }

    #[test]
    fn derivative_order_is_checked() {
        let m = build_kernel(1, 2, 4.0, 256, 3).unwrap();
        let g = GridSpec::line(2.0, 0.5).unwrap();
        assert!(matches!(
            eval_derivative(&m, &MultiIndex::new(vec![4]), &g),
            Err(Error::DerivativeOrder { order: 4, max: 3 })
        ));
    }

    #[test]
    fn radial_chain_second_derivative() {
        // d^2/dy1^2 Phi(r) = Phi_1 + y1^2 Phi_2
        let c = radial_chain(&MultiIndex::new(vec![2, 0]));
        assert_eq!(c.len(), 2);
        let p1 = &c.iter().find(|t| t.1 == 1).unwrap().0;
        let p2 = &c.iter().find(|t| t.1 == 2).unwrap().0;
        assert_eq!(p1.eval(&[0.3, 0.7]), 1.0);
        assert!((p2.eval(&[0.3, 0.7]) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn gaussian_first_derivative() {
        let g = KernelModel::standard(1, 1).unwrap();
        for &y in &[-3.0, -0.5, 1.0, 4.0] {
            let d = g.derivative_at(&MultiIndex::new(vec![1]), &[y]).unwrap();
            let f = g.value_at(&[y]).unwrap();
            assert!((d + 0.5 * y * f).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_table_is_an_error() {
        let cfg = KernelConfig::new(2, 2)
            .with_radial_extent(5.0)
            .with_nodes(256);
        let m = KernelModel::new(cfg).unwrap();
        assert!(m.value_at(&[3.0, 3.0]).is_ok());
        assert!(matches!(
            m.value_at(&[5.0, 3.0]),
            Err(Error::OutsideTable { .. })
        ));
    }

    #[test]
    fn laplacian_power_coefficients() {
        let m = KernelModel::new(
            KernelConfig::new(2, 2)
                .with_radial_extent(1.0)
                .with_nodes(256),
        )
        .unwrap();
        let mut lp = m.laplacian_power();
        lp.sort_by(|a, b| a.1.cmp(&b.1));
        let got: Vec<(f64, Vec<u32>)> = lp
            .iter()
            .map(|(c, b)| (*c, b.components().to_vec()))
            .collect();
        assert_eq!(
            got,
            vec![(-1.0, vec![0, 4]), (-2.0, vec![2, 2]), (-1.0, vec![4, 0])]
        );
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (a, b, rms) = line_fit(&x, &y);
        assert!((a - 2.0).abs() < 1e-14 && (b + 0.5).abs() < 1e-14 && rms < 1e-14);
    }
}
