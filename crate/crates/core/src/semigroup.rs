//! Rescaled linear evolution `w_tau = B w`, realized by the eigenfunction
//! expansion and by direct convolution with the kernel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};
use crate::kernel::{line_fit, KernelModel};
use crate::poly::MultiIndex;
use crate::spectral::EigenPairSet;

/// Relative size of `|u0|` at the grid edge that still counts as compact support.
pub const EDGE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub values: BTreeMap<MultiIndex, f64>,
    pub source: String,
}

impl MomentSet {
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .find(|(b, _)| b.order() == 0)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }
}

fn check_support(u0: &SampledField) -> Result<()> {
    let peak = u0.max_abs();
    let edge = edge_max(u0);
    if edge > EDGE_TOLERANCE * peak {
        return Err(Error::SupportAtBoundary { value: edge });
    }
    Ok(())
}

fn edge_max(u: &SampledField) -> f64 {
    match &u.grid {
        GridSpec::Uniform1d(a) => u.values[0].abs().max(u.values[a.len - 1].abs()),
        GridSpec::Radial(a) => u.values[a.len - 1].abs(),
        GridSpec::Tensor2d { x, y } => {
            let mut m = 0.0f64;
            for j in 0..y.len {
                for i in 0..x.len {
                    if i == 0 || j == 0 || i + 1 == x.len || j + 1 == y.len {
                        m = m.max(u.values[j * x.len + i].abs());
                    }
                }
            }
            m
        }
    }
}

/// `M_beta(u0) = (1/sqrt(beta!)) int z^beta u0(z) dz`.
pub fn momentum(u0: &SampledField, beta: &MultiIndex) -> Result<f64> {
    if beta.dim() != u0.dim() || u0.grid.kind() == crate::grid::GridKind::Radial {
        return Err(Error::GridMismatch(format!(
            "moment {beta} on a {:?} grid",
            u0.grid.kind()
        )));
    }
    check_support(u0)?;
    let c = 1.0 / (beta.factorial_u64() as f64).sqrt();
    let e = beta.components();
    let weighted: Vec<f64> = (0..u0.len())
        .map(|i| {
            let p = u0.grid.point(i);
            let mono: f64 = e
                .iter()
                .enumerate()
                .map(|(k, &ek)| p[k].powi(ek as i32))
                .product();
            mono * u0.values[i]
        })
        .collect();
    Ok(c * crate::grid::integrate_values(&u0.grid, &weighted))
}

pub fn moments(u0: &SampledField, max_order: u32, source: &str) -> Result<MomentSet> {
    let mut values = BTreeMap::new();
    for b in MultiIndex::graded_lex(u0.dim(), max_order) {
        let m = momentum(u0, &b)?;
        values.insert(b, m);
    }
    Ok(MomentSet {
        values,
        source: source.to_string(),
    })
}

/// `sum_{|beta| <= K} e^{lambda_beta tau} M_beta psi_beta` on the eigenpair grid.
pub fn evolve_expansion(
    pairs: &EigenPairSet,
    u0: &SampledField,
    tau: f64,
    k: u32,
) -> Result<SampledField> {
    if !(tau >= 0.0) {
        return Err(Error::config(format!(
            "tau must be non-negative, got {tau}"
        )));
    }
    if k > pairs.max_order {
        return Err(Error::config(format!(
            "truncation {k} exceeds eigenpair order {}",
            pairs.max_order
        )));
    }
    let mut out = SampledField::zeros(pairs.grid().clone());
    for beta in pairs.indices.iter().filter(|b| b.order() <= k) {
        let m = momentum(u0, beta)?;
        let decay = (pairs.eigenvalue_f64(beta) * tau).exp();
        let psi = &pairs.eigenfunctions[beta];
        for (o, p) in out.values.iter_mut().zip(&psi.values) {
            *o += decay * m * p;
        }
    }
    Ok(out)
}

/// `int F(y - z e^{-tau/2m}) u0(z) dz` on the grid of `u0`.
pub fn evolve_convolution(
    model: &KernelModel,
    u0: &SampledField,
    tau: f64,
) -> Result<SampledField> {
    evolve_convolution_on(model, u0, tau, &u0.grid)
}

/// Convolution form with an explicit output grid.
pub fn evolve_convolution_on(
    model: &KernelModel,
    u0: &SampledField,
    tau: f64,
    out: &GridSpec,
) -> Result<SampledField> {
    if !(tau > 0.0) {
        return Err(Error::config(
            "convolution form needs tau > 0; tau = 0 is the identity",
        ));
    }
    if u0.dim() != model.dim() || out.dim() != model.dim() {
        return Err(Error::GridMismatch(
            "data and kernel dimensions differ".into(),
        ));
    }
    check_support(u0)?;
    let shrink = (-tau / (2.0 * model.order() as f64)).exp();
    let vol = u0.spacing().powi(u0.dim() as i32);
    // trapezoid weights: end points of decayed data are zero anyway
    let sources: Vec<([f64; 2], f64)> = (0..u0.len())
        .filter(|&i| u0.values[i] != 0.0)
        .map(|i| (u0.grid.point(i), u0.values[i] * vol))
        .collect();
    let mut values = vec![0.0; out.len()];
    for (i, slot) in values.iter_mut().enumerate() {
        let y = out.point(i);
        let mut acc = 0.0;
        for (z, w) in &sources {
            let arg = [y[0] - shrink * z[0], y[1] - shrink * z[1]];
            acc += w * model.interpolated_value(&arg[..model.dim()])?;
        }
        *slot = acc;
    }
    SampledField::new(out.clone(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionComparison {
    pub tau: f64,
    pub truncation: u32,
    pub l2_error: f64,
    pub linf_error: f64,
}

pub fn compare(
    expansion: &SampledField,
    convolution: &SampledField,
    tau: f64,
    truncation: u32,
) -> Result<EvolutionComparison> {
    Ok(EvolutionComparison {
        tau,
        truncation,
        l2_error: expansion.l2_distance(convolution)?,
        linf_error: expansion.linf_distance(convolution)?,
    })
}

/// Mass-one `C^infinity` bump `exp(-1/(1 - z^2))` on `|z| < 1` (1D) or
/// `|z| < 1` in the plane.
pub fn unit_bump(grid: &GridSpec) -> Result<SampledField> {
    let raw = SampledField::from_fn(grid.clone(), |p| bump(p[0].hypot(p[1])))?;
    let mass = raw.integrate();
    Ok(raw.scaled(1.0 / mass))
}

/// Bump derivative `d^k/dz^k` of the 1D bump, `k <= 2`; moments below order
/// `k` vanish. The sampled `b''` under-resolves the steep edges, so its
/// discrete mass is removed with a multiple of the (even) bump.
pub fn bump_derivative(grid: &GridSpec, k: u32) -> Result<SampledField> {
    if grid.dim() != 1 || k > 2 {
        return Err(Error::Unsupported {
            what: "bump derivative",
            value: format!("k={k} on {}D", grid.dim()),
        });
    }
    let raw = SampledField::from_fn(grid.clone(), |p| {
        let z = p[0];
        if z.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - z * z;
        let b = (-1.0 / q).exp();
        let g1 = -2.0 * z / (q * q);
        let g2 = -2.0 / (q * q) - 8.0 * z * z / (q * q * q);
        match k {
            0 => b,
            1 => b * g1,
            _ => b * (g1 * g1 + g2),
        }
    })?;
    if k == 2 {
        let mass = raw.integrate();
        return raw.add_scaled(-mass, &unit_bump(grid)?);
    }
    Ok(raw)
}

fn bump(r: f64) -> f64 {
    if r < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Least-squares slope of `ln(norm)` against `tau`.
pub fn decay_slope(taus: &[f64], norms: &[f64]) -> Result<f64> {
    if taus.len() < 2 || taus.len() != norms.len() {
        return Err(Error::InsufficientData(
            "need two or more (tau, norm) pairs".into(),
        ));
    }
    let logs: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(line_fit(taus, &logs).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_moments() {
        let g = GridSpec::line(3.0, 0.01).unwrap();
        let u = unit_bump(&g).unwrap();
        assert!((momentum(&u, &MultiIndex::new(vec![0])).unwrap() - 1.0).abs() < 1e-14);
        assert!(momentum(&u, &MultiIndex::new(vec![1])).unwrap().abs() < 1e-15);
        let d1 = bump_derivative(&g, 1).unwrap();
        assert!(momentum(&d1, &MultiIndex::new(vec![0])).unwrap().abs() < 1e-15);
        let d2 = bump_derivative(&g, 2).unwrap();
        assert!(momentum(&d2, &MultiIndex::new(vec![0])).unwrap().abs() < 1e-14);
        assert!(momentum(&d2, &MultiIndex::new(vec![1])).unwrap().abs() < 1e-14);
    }

    #[test]
    fn boundary_support_rejected() {
        let g = GridSpec::line(0.5, 0.01).unwrap();
        let u = SampledField::from_fn(g, |_| 1.0).unwrap();
        assert!(matches!(
            momentum(&u, &MultiIndex::new(vec![0])),
            Err(Error::SupportAtBoundary { .. })
        ));
    }

    #[test]
    fn tau_zero_rejected_for_convolution() {
        let m = KernelModel::standard(1, 2).unwrap();
        let g = GridSpec::line(3.0, 0.1).unwrap();
        let u = unit_bump(&g).unwrap();
        assert!(matches!(
            evolve_convolution(&m, &u, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn slope_of_exponential() {
        let t = [1.0, 2.0, 3.0];
        let n: Vec<f64> = t.iter().map(|x: &f64| 3.0 * (-0.25 * x).exp()).collect();
        assert!((decay_slope(&t, &n).unwrap() + 0.25).abs() < 1e-14);
    }
}
