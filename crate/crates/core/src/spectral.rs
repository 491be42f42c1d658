//! Spectral pair of the rescaled operator
//! `B = (-1)^{m+1} Lap^m + (1/2m) y.grad + N/2m` and its adjoint
//! `B* = (-1)^{m+1} Lap^m - (1/2m) y.grad`.
//!
//! Eigenfunctions are normalised kernel derivatives, adjoint eigenfunctions are
//! generalized Hermite polynomials; together they are bi-orthonormal.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};
use crate::kernel::{DerivativeCombo, KernelModel, KernelTerm};
use crate::poly::{MultiIndex, Polynomial};

/// `lambda_beta = -|beta|/4` for the bi-harmonic operator.
pub fn eigenvalue(beta: &MultiIndex) -> Ratio<i64> {
    eigenvalue_for(beta, 2)
}

/// `lambda_beta = -|beta|/(2m)`.
pub fn eigenvalue_for(beta: &MultiIndex, order: u32) -> Ratio<i64> {
    Ratio::new(-(beta.order() as i64), 2 * order as i64)
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `psi_beta = (-1)^{|beta|} / sqrt(beta!) * D^beta F` on `grid`.
pub fn eigenfunction(
    model: &KernelModel,
    beta: &MultiIndex,
    grid: &GridSpec,
) -> Result<SampledField> {
    let sign = if beta.order() % 2 == 0 { 1.0 } else { -1.0 };
    let c = sign / (beta.factorial_u64() as f64).sqrt();
    model.sample(&DerivativeCombo::single(beta.clone(), c), grid)
}

/// Adjoint eigenfunction for the bi-harmonic case,
/// `(1/sqrt(beta!)) sum_j (1/j!) Lap^{2j} y^beta`.
pub fn adjoint_polynomial(beta: &MultiIndex) -> Polynomial {
    adjoint_polynomial_for(beta, 2)
}

/// General order: `(1/sqrt(beta!)) sum_j ((-1)^{mj}/j!) Lap^{mj} y^beta`.
/// For `m = 1` these are the probabilists' Hermite polynomials in `y/sqrt 2`
/// up to scaling.
pub fn adjoint_polynomial_for(beta: &MultiIndex, order: u32) -> Polynomial {
    let mono = Polynomial::monomial(beta.clone(), 1.0);
    let mut out = mono.clone();
    let mut current = mono;
    let mut fact = 1.0;
    let mut j = 1u32;
    while j * 2 * order <= beta.order() {
        current = current.laplacian_pow(order);
        fact *= j as f64;
        let sign = if (order * j) % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&current.scale(sign / fact));
        j += 1;
    }
    // exact integer square root applied last
    out.scale(1.0 / (beta.factorial_u64() as f64).sqrt())
}

/// `B* p`, exact on coefficients.
pub fn apply_b_star(poly: &Polynomial, order: u32) -> Polynomial {
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
    poly.laplacian_pow(order)
        .scale(sign)
        .sub(&poly.euler().scale(1.0 / (2.0 * order as f64)))
}

/// `B f` for a kernel-derived field, evaluated from Fourier-side derivatives.
pub fn apply_b(model: &KernelModel, field: &SampledField) -> Result<SampledField> {
    let combo = field.origin.as_ref().ok_or(Error::MissingDerivatives)?;
    let dim = model.dim();
    let two_m = 2.0 * model.order() as f64;
    let lap = model.laplacian_power();
    let mut terms = Vec::new();
    for (beta, c) in &combo.terms {
        for (lc, g) in &lap {
            terms.push(KernelTerm {
                beta: beta.plus(g),
                coeff: c * lc,
                multiplier: None,
            });
        }
        for axis in 0..dim {
            terms.push(KernelTerm {
                beta: beta.bump(axis, 1),
                coeff: c / two_m,
                multiplier: Some(axis),
            });
        }
        terms.push(KernelTerm {
            beta: beta.clone(),
            coeff: c * dim as f64 / two_m,
            multiplier: None,
        });
    }
    let values = model.sample_terms(&terms, &field.grid)?;
    SampledField::new(field.grid.clone(), values)
}

/// `y . grad f` for a kernel-derived field.
pub fn apply_euler(model: &KernelModel, field: &SampledField) -> Result<SampledField> {
    let combo = field.origin.as_ref().ok_or(Error::MissingDerivatives)?;
    let mut terms = Vec::new();
    for (beta, c) in &combo.terms {
        for axis in 0..model.dim() {
            terms.push(KernelTerm {
                beta: beta.bump(axis, 1),
                coeff: *c,
                multiplier: Some(axis),
            });
        }
    }
    SampledField::new(field.grid.clone(), model.sample_terms(&terms, &field.grid)?)
}

/// Applies `D^gamma` to a kernel-derived field (used for gradients and fluxes).
pub fn apply_derivative(
    model: &KernelModel,
    field: &SampledField,
    gamma: &MultiIndex,
) -> Result<SampledField> {
    let combo = field.origin.as_ref().ok_or(Error::MissingDerivatives)?;
    let shifted = DerivativeCombo {
        terms: combo
            .terms
            .iter()
            .map(|(b, c)| (b.plus(gamma), *c))
            .collect(),
    };
    model.sample(&shifted, &field.grid)
}

/// Eigenpairs up to order `K`, sampled on one grid.
#[derive(Clone, Debug)]
pub struct EigenPairSet {
    pub dim: usize,
    pub order: u32,
    pub max_order: u32,
    /// Graded lexicographic order.
    pub indices: Vec<MultiIndex>,
    pub eigenfunctions: BTreeMap<MultiIndex, SampledField>,
    pub adjoints: BTreeMap<MultiIndex, Polynomial>,
    pub eigenvalues: BTreeMap<MultiIndex, Ratio<i64>>,
}

impl EigenPairSet {
    pub fn build(model: &KernelModel, max_order: u32, grid: &GridSpec) -> Result<Self> {
        if max_order > model.max_deriv() {
            return Err(Error::DerivativeOrder {
                order: max_order,
                max: model.max_deriv(),
            });
        }
        let indices = MultiIndex::graded_lex(model.dim(), max_order);
        let mut eigenfunctions = BTreeMap::new();
        let mut adjoints = BTreeMap::new();
        let mut eigenvalues = BTreeMap::new();
        for beta in &indices {
            eigenfunctions.insert(beta.clone(), eigenfunction(model, beta, grid)?);
            adjoints.insert(beta.clone(), adjoint_polynomial_for(beta, model.order()));
            eigenvalues.insert(beta.clone(), eigenvalue_for(beta, model.order()));
        }
        Ok(EigenPairSet {
            dim: model.dim(),
            order: model.order(),
            max_order,
            indices,
            eigenfunctions,
            adjoints,
            eigenvalues,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.eigenfunctions[&self.indices[0]].grid
    }

    /// Indices of exactly order `k`, in basis order.
    pub fn level(&self, k: u32) -> Vec<MultiIndex> {
        self.indices
            .iter()
            .filter(|b| b.order() == k)
            .cloned()
            .collect()
    }

    pub fn psi(&self, beta: &MultiIndex) -> Result<&SampledField> {
        self.eigenfunctions
            .get(beta)
            .ok_or_else(|| Error::config(format!("eigenpair {beta} not in the set")))
    }

    pub fn adjoint(&self, beta: &MultiIndex) -> Result<&Polynomial> {
        self.adjoints
            .get(beta)
            .ok_or_else(|| Error::config(format!("eigenpair {beta} not in the set")))
    }

    pub fn eigenvalue_f64(&self, beta: &MultiIndex) -> f64 {
        ratio_f64(self.eigenvalues[beta])
    }
}

/// Samples a polynomial on a grid.
pub fn sample_polynomial(poly: &Polynomial, grid: &GridSpec) -> Result<SampledField> {
    SampledField::from_fn(grid.clone(), |p| poly.eval(&p[..poly.dim()]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramQuadrature {
    /// Allowed entry drift when the grid spacing is doubled.
    pub drift_tolerance: f64,
}

impl Default for GramQuadrature {
    fn default() -> Self {
        GramQuadrature {
            drift_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub indices: Vec<MultiIndex>,
    /// `entries[b][g] = <psi_b, psi*_g>`.
    pub entries: Vec<Vec<f64>>,
    /// Largest entry change against the every-other-point subgrid.
    pub drift: f64,
    pub resolved: bool,
}

impl GramMatrix {
    pub fn identity_error(&self) -> f64 {
        let mut e = 0.0f64;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                e = e.max((v - want).abs());
            }
        }
        e
    }
}

/// Duality pairings `<psi_beta, psi*_gamma>` for every pair in `pairs`.
pub fn gram_matrix(pairs: &EigenPairSet, quad: &GramQuadrature) -> Result<GramMatrix> {
    let grid = pairs.grid().clone();
    let coarse_grid = grid.subsample(2);
    let adj: Vec<SampledField> = pairs
        .indices
        .iter()
        .map(|g| sample_polynomial(&pairs.adjoints[g], &grid))
        .collect::<Result<_>>()?;
    let mut entries = vec![vec![0.0; pairs.indices.len()]; pairs.indices.len()];
    let mut drift = 0.0f64;
    for (i, b) in pairs.indices.iter().enumerate() {
        let psi = &pairs.eigenfunctions[b];
        let psi_c = psi.subsample(2);
        for (j, a) in adj.iter().enumerate() {
            let fine = psi.dot(a)?;
            let coarse = psi_c.dot(&a.subsample(2))?;
            debug_assert_eq!(psi_c.grid, coarse_grid);
            entries[i][j] = fine;
            drift = drift.max((fine - coarse).abs());
        }
    }
    Ok(GramMatrix {
        indices: pairs.indices.clone(),
        entries,
        drift,
        resolved: drift <= quad.drift_tolerance,
    })
}

/// `max |B psi_beta - lambda_beta psi_beta|` over grid points with `|y| <= radius`.
pub fn eigen_residual(
    model: &KernelModel,
    pairs: &EigenPairSet,
    beta: &MultiIndex,
    radius: f64,
) -> Result<f64> {
    let psi = pairs.psi(beta)?;
    let b = apply_b(model, psi)?;
    let lambda = pairs.eigenvalue_f64(beta);
    let mut worst = 0.0f64;
    for i in 0..psi.len() {
        let p = psi.grid.point(i);
        if p[0].hypot(p[1]) <= radius {
            worst = worst.max((b.values[i] - lambda * psi.values[i]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(c: &[u32]) -> MultiIndex {
        MultiIndex::new(c.to_vec())
    }

    #[test]
    fn eigenvalues_are_exact() {
        assert_eq!(eigenvalue(&mi(&[0])), Ratio::new(0, 1));
        assert_eq!(eigenvalue(&mi(&[1, 1])), Ratio::new(-1, 2));
        assert_eq!(eigenvalue(&mi(&[4])), Ratio::new(-1, 1));
        assert_eq!(eigenvalue_for(&mi(&[3]), 1), Ratio::new(-3, 2));
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint_polynomial(&mi(&[0])), Polynomial::constant(1, 1.0));
        let p2 = adjoint_polynomial(&mi(&[2]));
        assert_eq!(p2.degree(), Some(2));
        assert!((p2.coeff(&mi(&[2])) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p2.constant_term(), 0.0);
        let p4 = adjoint_polynomial(&mi(&[4]));
        let s = 24f64.sqrt();
        assert!((p4.coeff(&mi(&[4])) - 1.0 / s).abs() < 1e-15);
        assert!((p4.constant_term() - 24.0 / s).abs() < 1e-14);
    }

    #[test]
    fn hermite_case() {
        // m = 1: y^4 - 12 y^2 + 12 before normalisation
        let p = adjoint_polynomial_for(&mi(&[4]), 1).scale(24f64.sqrt());
        assert!((p.coeff(&mi(&[4])) - 1.0).abs() < 1e-14);
        assert!((p.coeff(&mi(&[2])) + 12.0).abs() < 1e-13);
        assert!((p.constant_term() - 12.0).abs() < 1e-13);
    }

    #[test]
    fn b_star_eigenrelation() {
        for order in [1, 2] {
            for beta in MultiIndex::graded_lex(2, 9) {
                let p = adjoint_polynomial_for(&beta, order);
                let lam = ratio_f64(eigenvalue_for(&beta, order));
                let diff = apply_b_star(&p, order).max_abs_diff(&p.scale(lam));
                assert!(diff < 1e-12, "beta {beta} m {order}: {diff}");
            }
        }
        assert!(apply_b_star(&Polynomial::constant(1, 1.0), 2).is_zero());
    }

    #[test]
    fn apply_b_needs_metadata() {
        let model = KernelModel::standard(1, 2).unwrap();
        let g = GridSpec::line(2.0, 0.5).unwrap();
        let plain = SampledField::zeros(g);
        assert!(matches!(
            apply_b(&model, &plain),
            Err(Error::MissingDerivatives)
        ));
    }
}
