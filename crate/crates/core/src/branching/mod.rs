//! Lyapunov-Schmidt branching systems for the first-order coefficients of
//! `alpha_k(n) = alpha_k + mu_k n + o(n)` at levels `k = 0, 1, 2`.
//!
//! With `Psi = sum_j c_j psi_j` over a level, each projected equation reads
//!
//! ```text
//! E_i = I_i(c) - (alpha/4) (G c)_i + mu c_i = 0,   sum_j c_j = 1,
//! I_i(c) = int grad psi*_i . ln|Psi| grad Lap Psi,
//! G_ij   = <psi*_i, y . grad psi_j>.
//! ```
//!
//! `mu` is eliminated to give one quadratic (k = 1) or two conics (k = 2) in
//! the free coefficients, perturbed by the log terms `omega`.

pub mod conic;
pub mod singular;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampledField;
use crate::kernel::KernelModel;
use crate::poly::MultiIndex;
use crate::spectral::{apply_derivative, apply_euler, sample_polynomial, EigenPairSet};

pub use conic::{classify_conic, intersect, Conic, ConicClass, ConicKind, FormClass};
pub use singular::{
    check_transversal, singular_inner_product, singular_integrals, SingularQuadConfig,
};

/// Nondegeneracy values below this make the fixed-point argument inapplicable.
pub const NONDEGENERACY_THRESHOLD: f64 = 1e-10;

/// `alpha_k(0) = (N + k) / 4`.
pub fn alpha_level(dim: usize, k: u32) -> f64 {
    (dim as f64 + k as f64) / 4.0
}

/// Fields of one level, in basis order, with everything the assembly needs.
#[derive(Clone, Debug)]
pub struct LevelFields {
    pub level: u32,
    pub indices: Vec<MultiIndex>,
    pub psi: Vec<SampledField>,
    /// `grad Lap psi_j`, one field per axis.
    pub flux: Vec<Vec<SampledField>>,
    pub adjoints: Vec<SampledField>,
    /// `grad psi*_i`, one field per axis.
    pub adjoint_grad: Vec<Vec<SampledField>>,
    /// `y . grad psi_j`.
    pub euler: Vec<SampledField>,
    /// `g[i][j] = <psi*_i, y . grad psi_j>`.
    pub g: Vec<Vec<f64>>,
    /// `pairing[i][j] = <psi_j, psi*_i>`.
    pub pairing: Vec<Vec<f64>>,
    /// Largest change of any `g` entry against the every-other-point subgrid.
    pub g_noise: f64,
}

impl LevelFields {
    pub fn build(
        model: &KernelModel,
        pairs: &EigenPairSet,
        indices: &[MultiIndex],
    ) -> Result<Self> {
        let dim = model.dim();
        let level = indices.first().map(|b| b.order()).unwrap_or(0);
        if indices.is_empty() || indices.iter().any(|b| b.order() != level || b.dim() != dim) {
            return Err(Error::config(
                "level basis must be non-empty, of one order and of the kernel dimension",
            ));
        }
        if level + 3 > model.max_deriv() {
            return Err(Error::DerivativeOrder {
                order: level + 3,
                max: model.max_deriv(),
            });
        }
        let grid = pairs.grid().clone();
        let mut psi = Vec::new();
        let mut flux = Vec::new();
        let mut adjoints = Vec::new();
        let mut adjoint_grad = Vec::new();
        let mut euler = Vec::new();
        for beta in indices {
            let p = pairs.psi(beta)?.clone();
            let mut components = Vec::with_capacity(dim);
            for a in 0..dim {
                let mut acc: Option<SampledField> = None;
                for b in 0..dim {
                    let gamma = MultiIndex::unit(dim, a).bump(b, 2);
                    let d = apply_derivative(model, &p, &gamma)?;
                    acc = Some(match acc {
                        None => d,
                        Some(s) => s.add_scaled(1.0, &d)?,
                    });
                }
                components.push(acc.expect("dim >= 1"));
            }
            let adj = pairs.adjoint(beta)?;
            adjoints.push(sample_polynomial(adj, &grid)?);
            adjoint_grad.push(
                (0..dim)
                    .map(|a| sample_polynomial(&adj.partial(a), &grid))
                    .collect::<Result<Vec<_>>>()?,
            );
            euler.push(apply_euler(model, &p)?);
            flux.push(components);
            psi.push(p);
        }
        let m = indices.len();
        let mut g = vec![vec![0.0; m]; m];
        let mut pairing = vec![vec![0.0; m]; m];
        let mut g_noise = 0.0f64;
        for i in 0..m {
            let adj_c = adjoints[i].subsample(2);
            for j in 0..m {
                g[i][j] = adjoints[i].dot(&euler[j])?;
                pairing[i][j] = adjoints[i].dot(&psi[j])?;
                let coarse = adj_c.dot(&euler[j].subsample(2))?;
                g_noise = g_noise.max((coarse - g[i][j]).abs());
            }
        }
        Ok(LevelFields {
            level,
            indices: indices.to_vec(),
            psi,
            flux,
            adjoints,
            adjoint_grad,
            euler,
            g,
            pairing,
            g_noise,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Same fields in the order `perm` (new position `i` holds old `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.len();
        let mut seen = vec![false; m];
        if perm.len() != m
            || perm
                .iter()
                .any(|&p| p >= m || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::config("not a permutation of the level basis"));
        }
        let pick = |v: &Vec<SampledField>| perm.iter().map(|&p| v[p].clone()).collect::<Vec<_>>();
        let pick2 =
            |v: &Vec<Vec<SampledField>>| perm.iter().map(|&p| v[p].clone()).collect::<Vec<_>>();
        let mat = |v: &Vec<Vec<f64>>| {
            perm.iter()
                .map(|&p| perm.iter().map(|&q| v[p][q]).collect())
                .collect()
        };
        Ok(LevelFields {
            level: self.level,
            indices: perm.iter().map(|&p| self.indices[p].clone()).collect(),
            psi: pick(&self.psi),
            flux: pick2(&self.flux),
            adjoints: pick(&self.adjoints),
            adjoint_grad: pick2(&self.adjoint_grad),
            euler: pick(&self.euler),
            g: mat(&self.g),
            pairing: mat(&self.pairing),
            g_noise: self.g_noise,
        })
    }

    /// `I_i(c)` for every basis element.
    pub fn log_terms(&self, c: &[f64], cfg: &SingularQuadConfig) -> Result<Vec<f64>> {
        if c.len() != self.len() {
            return Err(Error::config(format!(
                "expected {} coefficients, got {}",
                self.len(),
                c.len()
            )));
        }
        let n = self.psi[0].len();
        let dim = self.flux[0].len();
        let mut psi = vec![0.0; n];
        let mut flux = vec![vec![0.0; n]; dim];
        // a fixed summation order keeps the result invariant under basis permutation
        let mut order: Vec<usize> = (0..c.len()).collect();
        order.sort_by(|&a, &b| self.indices[a].cmp(&self.indices[b]));
        for j in order {
            let cj = c[j];
            if cj == 0.0 {
                continue;
            }
            for k in 0..n {
                psi[k] += cj * self.psi[j].values[k];
            }
            for a in 0..dim {
                let f = &self.flux[j][a].values;
                for k in 0..n {
                    flux[a][k] += cj * f[k];
                }
            }
        }
        let qs: Vec<Vec<f64>> = self
            .adjoint_grad
            .iter()
            .map(|grad| {
                let mut q = vec![0.0; n];
                for a in 0..dim {
                    for k in 0..n {
                        q[k] += grad[a].values[k] * flux[a][k];
                    }
                }
                q
            })
            .collect();
        let refs: Vec<&[f64]> = qs.iter().map(|q| q.as_slice()).collect();
        let g = SampledField::new(self.psi[0].grid.clone(), psi)?;
        singular_integrals(&refs, &g, cfg)
    }
}

/// Source of the log terms `I(c)`.
#[derive(Clone)]
pub enum Perturbation {
    /// `omega = 0` (model systems given by their coefficients).
    Zero,
    Assembled {
        fields: Arc<LevelFields>,
        cfg: SingularQuadConfig,
    },
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Zero => write!(f, "Zero"),
            Perturbation::Assembled { fields, cfg } => {
                write!(f, "Assembled(level {}, {:?})", fields.level, cfg)
            }
        }
    }
}

impl Perturbation {
    pub fn is_zero(&self) -> bool {
        matches!(self, Perturbation::Zero)
    }

    pub fn log_terms(&self, c: &[f64]) -> Result<Vec<f64>> {
        match self {
            Perturbation::Zero => Ok(vec![0.0; c.len()]),
            Perturbation::Assembled { fields, cfg } => fields.log_terms(c, cfg),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSolution {
    pub level: u32,
    /// `beta -> c_beta`, keys like `(1,0)`.
    pub coefficients: BTreeMap<String, f64>,
    pub mu_first: f64,
    pub residual: f64,
    pub newton_iters: usize,
    /// `mu` came from the least-squares fallback.
    pub mu_least_squares: bool,
}

impl BranchSolution {
    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.values().sum()
    }
}

fn solution(
    level: u32,
    indices: &[MultiIndex],
    c: &[f64],
    mu: f64,
    residual: f64,
    iters: usize,
    ls: bool,
) -> BranchSolution {
    BranchSolution {
        level,
        coefficients: indices
            .iter()
            .zip(c)
            .map(|(b, v)| (b.to_string(), *v))
            .collect(),
        mu_first: mu,
        residual,
        newton_iters: iters,
        mu_least_squares: ls,
    }
}

/// Level `k = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct K0Report {
    pub dim: usize,
    pub alpha0: f64,
    pub mu_first: f64,
    /// `-N^2/16`.
    pub oracle: f64,
    pub relative_error: f64,
    /// `int grad psi*_0 . ln|psi_0| grad Lap psi_0` (zero because `psi*_0 = 1`).
    pub log_term: f64,
    pub g00: f64,
    pub pairing: f64,
}

/// `mu_{1,0} = [(alpha_0/4) <psi*_0, y.grad psi_0> - I_0] / <psi_0, psi*_0>`.
pub fn assemble_k0(
    model: &KernelModel,
    pairs: &EigenPairSet,
    cfg: &SingularQuadConfig,
) -> Result<K0Report> {
    k0_from_fields(
        &LevelFields::build(model, pairs, &[MultiIndex::zero(model.dim())])?,
        cfg,
    )
}

/// Same as [`assemble_k0`] with `psi_0` multiplied by `scale > 0`.
pub fn assemble_k0_scaled(
    model: &KernelModel,
    pairs: &EigenPairSet,
    cfg: &SingularQuadConfig,
    scale: f64,
) -> Result<K0Report> {
    let mut fields = LevelFields::build(model, pairs, &[MultiIndex::zero(model.dim())])?;
    fields.psi[0] = fields.psi[0].scaled(scale);
    for f in &mut fields.flux[0] {
        *f = f.scaled(scale);
    }
    fields.euler[0] = fields.euler[0].scaled(scale);
    fields.g[0][0] *= scale;
    fields.pairing[0][0] *= scale;
    k0_from_fields(&fields, cfg)
}

fn k0_from_fields(fields: &LevelFields, cfg: &SingularQuadConfig) -> Result<K0Report> {
    let dim = fields.psi[0].dim();
    let alpha0 = alpha_level(dim, 0);
    let log_term = fields.log_terms(&[1.0], cfg)?[0];
    let pairing = fields.pairing[0][0];
    let mu = (alpha0 / 4.0 * fields.g[0][0] - log_term) / pairing;
    let oracle = -((dim * dim) as f64) / 16.0;
    Ok(K0Report {
        dim,
        alpha0,
        mu_first: mu,
        oracle,
        relative_error: ((mu - oracle) / oracle).abs(),
        log_term,
        g00: fields.g[0][0],
        pairing,
    })
}

/// Predicted number of roots of a quadratic on `[0, 1]`, or a continuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootCount {
    Finite(usize),
    Continuum,
}

/// Conditions (a)-(c) on `F(c2) = A c2^2 + B c2 + C` over `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootConditions {
    /// `C (A + B + C) > 0`: equal signs at both ends.
    pub a: bool,
    /// `C (C - B^2/(4A)) < 0`: the vertex value has the opposite sign.
    pub b: bool,
    /// `0 < -B/(2A) < 1`: the vertex lies inside.
    pub c: bool,
    pub predicted: RootCount,
}

/// Coefficients with `|x| <= zero_tol` are treated as zero.
pub fn root_conditions(a: f64, b: f64, c: f64, zero_tol: f64) -> RootConditions {
    let z = |v: f64| if v.abs() <= zero_tol { 0.0 } else { v };
    let (a, b, c) = (z(a), z(b), z(c));
    let end = a + b + c;
    let vertex_inside = a != 0.0 && {
        let v = -b / (2.0 * a);
        v > 0.0 && v < 1.0
    };
    let vertex_value = if a != 0.0 {
        c - b * b / (4.0 * a)
    } else {
        f64::NAN
    };
    let ca = c * end > 0.0;
    let cb = a != 0.0 && c * vertex_value < 0.0;
    let predicted = if a == 0.0 && b == 0.0 && c == 0.0 {
        RootCount::Continuum
    } else if c * end < 0.0 {
        RootCount::Finite(1)
    } else if ca {
        RootCount::Finite(if cb && vertex_inside { 2 } else { 0 })
    } else {
        // a root sits on an end point
        RootCount::Finite(quadratic_roots_in_unit(a, b, c).len())
    };
    RootConditions {
        a: ca,
        b: cb,
        c: vertex_inside,
        predicted,
    }
}

fn quadratic_roots_in_unit(a: f64, b: f64, c: f64) -> Vec<f64> {
    let mut r = real_quadratic_roots(a, b, c);
    r.retain(|x| (-1e-12..=1.0 + 1e-12).contains(x));
    r
}

/// Real roots, repeated roots once; `a = 0` falls back to the linear case.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs());
    if disc.abs() <= 1e-14 * scale {
        return vec![-b / (2.0 * a)];
    }
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut r = vec![q / a, c / q];
    r.sort_by(f64::total_cmp);
    r
}

/// Whether the solution set is a set of isolated points or a continuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionStructure {
    Isolated,
    Continuum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Lattice points per unit of `c` used for `||omega||` and seeding.
    pub lattice: usize,
    /// `omega` counts as identically zero when its lattice sup is below this
    /// fraction of the largest log term.
    pub continuum_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            newton_tol: 1e-10,
            max_iter: 50,
            lattice: 20,
            continuum_tol: 1e-4,
        }
    }
}

/// Level `k = 1` in two dimensions: `F(c2) + omega(c2) = 0`.
#[derive(Clone, Debug)]
pub struct DipoleSystem {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `A` with the opposite sign, the convention of the closed-form coefficient list.
    pub a_as_printed: f64,
    pub g: [[f64; 2]; 2],
    /// `<psi*_1, y.grad psi_1> - <psi*_1, y.grad psi_2>`.
    pub nondegeneracy: f64,
    pub alpha1: f64,
    /// Quadrature uncertainty of `A`, `B`, `C`.
    pub coefficient_noise: f64,
    pub indices: Vec<MultiIndex>,
    pub omega: Perturbation,
}

fn dipole_coefficients(g: &[[f64; 2]; 2], alpha: f64) -> (f64, f64, f64) {
    let s = alpha / 4.0;
    (
        -s * (g[0][0] + g[1][0] - g[0][1] - g[1][1]),
        s * (g[0][0] + 2.0 * g[1][0] - g[1][1]),
        -s * g[1][0],
    )
}

impl DipoleSystem {
    /// Model system with `omega = 0`; a `G` reproducing the coefficients is
    /// chosen (with nondegeneracy 1) so that `mu` can be recovered.
    pub fn from_coefficients(a: f64, b: f64, c: f64) -> Self {
        let alpha = alpha_level(2, 1);
        let s = alpha / 4.0;
        let g21 = -c / s;
        let g22 = 1.0 + a / s + g21;
        let g11 = b / s - 2.0 * g21 + g22;
        let g12 = g11 + g21 - g22 + a / s;
        let g = [[g11, g12], [g21, g22]];
        DipoleSystem {
            a,
            b,
            c,
            a_as_printed: -a,
            g,
            nondegeneracy: g11 - g12,
            alpha1: alpha,
            coefficient_noise: 0.0,
            indices: MultiIndex::of_order(2, 1),
            omega: Perturbation::Zero,
        }
    }

    pub fn quadratic(&self, c2: f64) -> f64 {
        (self.a * c2 + self.b) * c2 + self.c
    }

    /// `omega(c2)` together with the log terms it came from.
    pub fn omega_terms(&self, c2: f64) -> Result<(f64, [f64; 2])> {
        let i = self.omega.log_terms(&[1.0 - c2, c2])?;
        Ok((i[1] - c2 * (i[0] + i[1]), [i[0], i[1]]))
    }

    pub fn omega(&self, c2: f64) -> Result<f64> {
        Ok(self.omega_terms(c2)?.0)
    }

    pub fn residual(&self, c2: f64) -> Result<f64> {
        Ok(self.quadratic(c2) + self.omega(c2)?)
    }

    /// `mu = -(I_1 + I_2) + (alpha/4) sum_i (G c)_i`.
    pub fn mu(&self, c2: f64, log_terms: [f64; 2]) -> f64 {
        let c = [1.0 - c2, c2];
        let gc: f64 = (0..2)
            .map(|i| self.g[i][0] * c[0] + self.g[i][1] * c[1])
            .sum();
        -(log_terms[0] + log_terms[1]) + self.alpha1 / 4.0 * gc
    }

    pub fn conditions(&self) -> RootConditions {
        root_conditions(self.a, self.b, self.c, self.zero_tol())
    }

    fn zero_tol(&self) -> f64 {
        10.0 * self.coefficient_noise
    }

    /// The system with `psi_1` and `psi_2` exchanged.
    pub fn swapped(&self) -> Result<DipoleSystem> {
        match &self.omega {
            Perturbation::Assembled { fields, cfg } => {
                dipole_from_fields(Arc::new(fields.permuted(&[1, 0])?), cfg.clone())
            }
            Perturbation::Zero => {
                let g = [[self.g[1][1], self.g[1][0]], [self.g[0][1], self.g[0][0]]];
                let (a, b, c) = dipole_coefficients(&g, self.alpha1);
                Ok(DipoleSystem {
                    a,
                    b,
                    c,
                    a_as_printed: -a,
                    g,
                    nondegeneracy: g[0][0] - g[0][1],
                    indices: vec![self.indices[1].clone(), self.indices[0].clone()],
                    ..self.clone()
                })
            }
        }
    }

    pub fn summary(&self) -> DipoleCoefficients {
        DipoleCoefficients {
            a: self.a,
            b: self.b,
            c: self.c,
            a_as_printed: self.a_as_printed,
            g: self.g,
            nondegeneracy: self.nondegeneracy,
            alpha1: self.alpha1,
            coefficient_noise: self.coefficient_noise,
            diagonal_swap_defect: self.g[0][0] - self.g[1][1],
            cross_swap_defect: self.g[0][1] - self.g[1][0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_as_printed: f64,
    pub g: [[f64; 2]; 2],
    pub nondegeneracy: f64,
    pub alpha1: f64,
    pub coefficient_noise: f64,
    /// `<y1, y.grad d1 F> - <y2, y.grad d2 F>` (zero by coordinate swap).
    pub diagonal_swap_defect: f64,
    /// `<y1, y.grad d2 F> - <y2, y.grad d1 F>`.
    pub cross_swap_defect: f64,
}

/// `N = 2`, `k = 1`, basis `psi_(1,0), psi_(0,1)`.
pub fn assemble_dipole(
    model: &KernelModel,
    pairs: &EigenPairSet,
    cfg: &SingularQuadConfig,
) -> Result<DipoleSystem> {
    if model.dim() != 2 {
        return Err(Error::Unsupported {
            what: "dipole system dimension",
            value: model.dim().to_string(),
        });
    }
    cfg.validate()?;
    let basis = [MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1])];
    let fields = LevelFields::build(model, pairs, &basis)?;
    dipole_from_fields(Arc::new(fields), cfg.clone())
}

fn dipole_from_fields(fields: Arc<LevelFields>, cfg: SingularQuadConfig) -> Result<DipoleSystem> {
    let g = [
        [fields.g[0][0], fields.g[0][1]],
        [fields.g[1][0], fields.g[1][1]],
    ];
    let alpha = alpha_level(2, 1);
    let (a, b, c) = dipole_coefficients(&g, alpha);
    let gmax = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    // each coefficient combines at most four entries
    let coefficient_noise = alpha * (fields.g_noise + 16.0 * f64::EPSILON * gmax);
    let sys = DipoleSystem {
        a,
        b,
        c,
        a_as_printed: -a,
        g,
        nondegeneracy: g[0][0] - g[0][1],
        alpha1: alpha,
        coefficient_noise,
        indices: fields.indices.clone(),
        omega: Perturbation::Assembled { fields, cfg },
    };
    if ![a, b, c, sys.nondegeneracy].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(0));
    }
    Ok(sys)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleReport {
    pub coefficients: DipoleCoefficients,
    pub conditions: RootConditions,
    pub structure: SolutionStructure,
    pub solutions: Vec<BranchSolution>,
    pub root_count: RootCount,
    /// `max |omega|` over the lattice.
    pub omega_sup: f64,
    /// `max |I_i|` over the lattice.
    pub log_term_sup: f64,
    /// `||omega|| <= |F(c2*)|` at every isolated root.
    pub perturbation_controlled: bool,
    pub warnings: Vec<String>,
}

fn newton_1d(
    f: impl Fn(f64) -> Result<f64>,
    mut x: f64,
    tol: f64,
    max_iter: usize,
    fd: f64,
) -> Result<(f64, usize)> {
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        let r = f(x)?;
        if r.abs() <= tol {
            return Ok((x, it));
        }
        let d = (f(x + fd)? - f(x - fd)?) / (2.0 * fd);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Singular("zero derivative in Newton".into()));
        }
        let step = r / d;
        x -= step;
        last = step.abs();
        if !x.is_finite() || x.abs() > 1e6 {
            return Err(Error::Divergence {
                what: "Newton",
                detail: format!("iterate {x}"),
            });
        }
    }
    Err(Error::NoConvergence {
        what: "Newton",
        iterations: max_iter,
        last,
    })
}

fn dedupe_sorted(mut xs: Vec<(f64, usize)>, tol: f64) -> Vec<(f64, usize)> {
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for x in xs {
        if out.last().map_or(true, |l| (x.0 - l.0).abs() > tol) {
            out.push(x);
        }
    }
    out
}

/// Roots of `F + omega` on `[0, 1]`.
pub fn solve_dipole(sys: &DipoleSystem, opts: &SolveOptions) -> Result<DipoleReport> {
    if sys.nondegeneracy.abs() < NONDEGENERACY_THRESHOLD {
        return Err(Error::Invariant(format!(
            "dipole nondegeneracy {:e} below {NONDEGENERACY_THRESHOLD:e}",
            sys.nondegeneracy
        )));
    }
    let conditions = sys.conditions();
    let mut warnings = Vec::new();
    let tol0 = sys.zero_tol();
    let lattice: Vec<f64> = (0..=opts.lattice)
        .map(|j| j as f64 / opts.lattice as f64)
        .collect();
    let mut omega_sup = 0.0f64;
    let mut log_sup = 0.0f64;
    let mut samples = Vec::with_capacity(lattice.len());
    for &c2 in &lattice {
        let (w, i) = if sys.omega.is_zero() {
            (0.0, [0.0, 0.0])
        } else {
            sys.omega_terms(c2)?
        };
        omega_sup = omega_sup.max(w.abs());
        log_sup = log_sup.max(i[0].abs()).max(i[1].abs());
        samples.push((c2, w, i));
    }
    let quad_zero = sys.a.abs() <= tol0 && sys.b.abs() <= tol0 && sys.c.abs() <= tol0;
    if quad_zero && omega_sup <= opts.continuum_tol * log_sup.max(1.0) {
        warnings
            .push("F and omega vanish identically: every c2 in [0, 1] solves the system".into());
        let solutions = samples
            .iter()
            .map(|&(c2, w, i)| {
                let c = [1.0 - c2, c2];
                let residual = (sys.quadratic(c2) + w).abs();
                solution(1, &sys.indices, &c, sys.mu(c2, i), residual, 0, false)
            })
            .collect();
        return Ok(DipoleReport {
            coefficients: sys.summary(),
            conditions,
            structure: SolutionStructure::Continuum,
            solutions,
            root_count: RootCount::Continuum,
            omega_sup,
            log_term_sup: log_sup,
            perturbation_controlled: true,
            warnings,
        });
    }
    let (a, b, c) = [sys.a, sys.b, sys.c]
        .map(|v| if v.abs() <= tol0 { 0.0 } else { v })
        .into();
    if a == 0.0 {
        warnings.push("A vanishes: linear case".into());
    }
    let mut seeds: Vec<f64> = real_quadratic_roots(a, b, c)
        .into_iter()
        .filter(|x| (-0.1..=1.1).contains(x))
        .collect();
    if !sys.omega.is_zero() {
        for w in samples.windows(2) {
            let (h0, h1) = (
                sys.quadratic(w[0].0) + w[0].1,
                sys.quadratic(w[1].0) + w[1].1,
            );
            if h0 == 0.0 || h0 * h1 < 0.0 {
                seeds.push(if h0 == h1 {
                    w[0].0
                } else {
                    w[0].0 - h0 * (w[1].0 - w[0].0) / (h1 - h0)
                });
            }
        }
    }
    let mut roots = Vec::new();
    for s in seeds {
        let found = if sys.omega.is_zero() {
            // exact quadratic roots, polished against the quadratic only
            newton_1d(
                |x| Ok(sys.quadratic(x)),
                s,
                opts.newton_tol,
                opts.max_iter,
                1e-7,
            )
            .or_else(|e| {
                if sys.quadratic(s).abs() <= opts.newton_tol {
                    Ok((s, 0))
                } else {
                    Err(e)
                }
            })
        } else {
            newton_1d(|x| sys.residual(x), s, opts.newton_tol, opts.max_iter, 1e-6)
        };
        match found {
            Ok(r) if (-1e-12..=1.0 + 1e-12).contains(&r.0) => {
                roots.push((r.0.clamp(0.0, 1.0), r.1))
            }
            Ok(_) => {}
            Err(e) => warnings.push(format!("seed {s}: {e}")),
        }
    }
    let roots = dedupe_sorted(roots, 1e-9);
    let mut solutions = Vec::new();
    let mut controlled = true;
    for (c2, iters) in roots {
        let (w, i) = if sys.omega.is_zero() {
            (0.0, [0.0, 0.0])
        } else {
            sys.omega_terms(c2)?
        };
        let f = sys.quadratic(c2);
        controlled &= omega_sup <= f.abs().max(tol0);
        solutions.push(solution(
            1,
            &sys.indices,
            &[1.0 - c2, c2],
            sys.mu(c2, i),
            (f + w).abs(),
            iters,
            false,
        ));
    }
    let root_count = RootCount::Finite(solutions.len());
    Ok(DipoleReport {
        coefficients: sys.summary(),
        conditions,
        structure: SolutionStructure::Isolated,
        solutions,
        root_count,
        omega_sup,
        log_term_sup: log_sup,
        perturbation_controlled: controlled,
        warnings,
    })
}

/// Affine form `l0 + l2 c2 + l3 c3`.
type Lin = [f64; 3];

fn lin_product(p: Lin, q: Lin) -> Conic {
    Conic {
        a: p[1] * q[1],
        b: p[2] * q[2],
        c: p[0] * q[1] + p[1] * q[0],
        d: p[0] * q[2] + p[2] * q[0],
        e: p[1] * q[2] + p[2] * q[1],
        f: p[0] * q[0],
    }
}

fn conic_sum(p: Conic, q: Conic, s: f64) -> Conic {
    Conic {
        a: p.a + s * q.a,
        b: p.b + s * q.b,
        c: p.c + s * q.c,
        d: p.d + s * q.d,
        e: p.e + s * q.e,
        f: p.f + s * q.f,
    }
}

fn conic_scale(p: Conic, s: f64) -> Conic {
    conic_sum(Conic::default(), p, s)
}

/// The two conics of the level `k = 2` system from `G`:
///
/// ```text
/// (c3 - c2) E_1 + c1 (E_2 - E_3)  and  c3 E_2 - c2 E_3,
/// ```
///
/// with `c1 = 1 - c2 - c3`; `mu` cancels from both.
pub fn triple_conics(g: &[[f64; 3]; 3], alpha: f64) -> [Conic; 2] {
    let gc: Vec<Lin> = (0..3)
        .map(|i| [g[i][0], g[i][1] - g[i][0], g[i][2] - g[i][0]])
        .collect();
    let c1: Lin = [1.0, -1.0, -1.0];
    let c2: Lin = [0.0, 1.0, 0.0];
    let c3: Lin = [0.0, 0.0, 1.0];
    let d32: Lin = [0.0, -1.0, 1.0];
    let diff23: Lin = [
        gc[1][0] - gc[2][0],
        gc[1][1] - gc[2][1],
        gc[1][2] - gc[2][2],
    ];
    let s = -alpha / 4.0;
    let first = conic_scale(
        conic_sum(lin_product(d32, gc[0]), lin_product(c1, diff23), 1.0),
        s,
    );
    let second = conic_scale(
        conic_sum(lin_product(c3, gc[1]), lin_product(c2, gc[2]), -1.0),
        s,
    );
    [first, second]
}

/// The closed-form coefficient lists evaluated literally, kept for comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedTripleCoefficients {
    /// `A_i ... E_i` evaluated literally, with `psi*_1` in the last `C_1`
    /// term and `grad psi*` in `E_1` read as `psi*`.
    pub conics: [Conic; 2],
    /// `C_1` with `int psi_1 y.grad psi_1` exactly as printed.
    pub c1_as_printed: f64,
    /// Largest difference between printed and derived `A_i ... E_i`.
    pub max_difference: f64,
}

fn printed_triple(
    g: &[[f64; 3]; 3],
    alpha: f64,
    plain_c1: f64,
    derived: &[Conic; 2],
) -> PrintedTripleCoefficients {
    let s = alpha / 4.0;
    let g = |i: usize, j: usize| g[i - 1][j - 1];
    let first = Conic {
        a: -s * ((g(1, 1) + g(2, 1) - g(3, 1)) - (g(1, 2) + g(2, 2) - g(3, 2))),
        b: s * ((g(1, 1) - g(2, 1) + g(3, 1)) - (g(1, 3) - g(2, 3) + g(3, 3))),
        c: s * (2.0 * (g(2, 1) - g(3, 1)) - (g(2, 2) - g(3, 2)) - g(1, 1)),
        d: s * (2.0 * (g(2, 1) - g(3, 1)) - (g(2, 3) - g(3, 3)) - g(1, 1)),
        e: s * ((g(1, 3) - g(1, 2))
            - (2.0 * (g(2, 1) - g(3, 1)) - (g(2, 2) - g(3, 2)) - (g(2, 3) - g(3, 3)))),
        f: -s * (g(2, 1) - g(3, 1)),
    };
    let second = Conic {
        a: -s * (g(3, 1) - g(3, 2)),
        b: s * (g(2, 1) - g(2, 3)),
        c: s * g(3, 1),
        d: -s * g(2, 1),
        e: s * ((g(2, 1) - g(2, 2)) - (g(3, 1) - g(3, 3))),
        f: 0.0,
    };
    let c1_as_printed = s * (2.0 * (g(2, 1) - g(3, 1)) - (g(2, 2) - g(3, 2)) - plain_c1);
    let conics = [first, second];
    let mut max_difference = 0.0f64;
    for (p, q) in conics.iter().zip(derived) {
        for (x, y) in [(p.a, q.a), (p.b, q.b), (p.c, q.c), (p.d, q.d), (p.e, q.e)] {
            max_difference = max_difference.max((x - y).abs());
        }
    }
    PrintedTripleCoefficients {
        conics,
        c1_as_printed,
        max_difference,
    }
}

/// Level `k = 2` in two dimensions, basis `psi_(2,0), psi_(1,1), psi_(0,2)`.
#[derive(Clone, Debug)]
pub struct TripleSystem {
    /// `A_i c2^2 + B_i c3^2 + C_i c2 + D_i c3 + E_i c2 c3 + F_i` as
    /// `Conic { a: A_i, b: B_i, c: C_i, d: D_i, e: E_i, f: F_i }`. `F_1` is
    /// the `G`-part of the constant that the closed form keeps inside `omega_1`.
    pub conics: [Conic; 2],
    pub printed: PrintedTripleCoefficients,
    pub g: [[f64; 3]; 3],
    pub nondegeneracy: f64,
    pub alpha2: f64,
    pub coefficient_noise: f64,
    pub indices: Vec<MultiIndex>,
    pub omega: Perturbation,
}

fn triple_nondegeneracy(g: &[[f64; 3]; 3]) -> f64 {
    let g = |i: usize, j: usize| g[i - 1][j - 1];
    (g(1, 3) - g(1, 1)) * (g(2, 3) - g(2, 2)) - (g(1, 3) - g(1, 2)) * (g(2, 3) - g(2, 1))
}

impl TripleSystem {
    /// Model system with `omega = 0` and `G = 0` (so `mu = 0` at every root).
    pub fn from_conics(first: Conic, second: Conic) -> Self {
        let conics = [first, second];
        TripleSystem {
            conics,
            printed: PrintedTripleCoefficients {
                conics,
                c1_as_printed: first.c,
                max_difference: 0.0,
            },
            g: [[0.0; 3]; 3],
            nondegeneracy: 1.0,
            alpha2: alpha_level(2, 2),
            coefficient_noise: 0.0,
            indices: MultiIndex::of_order(2, 2),
            omega: Perturbation::Zero,
        }
    }

    /// `(omega_1, omega_2)` with the log terms.
    pub fn omega_terms(&self, c2: f64, c3: f64) -> Result<([f64; 2], [f64; 3])> {
        let i = self.omega.log_terms(&[1.0 - c2 - c3, c2, c3])?;
        let w1 = c3 * (i[0] - i[1] + i[2]) - c2 * (i[0] + i[1] - i[2]) + (i[1] - i[2]);
        let w2 = c3 * i[1] - c2 * i[2];
        Ok(([w1, w2], [i[0], i[1], i[2]]))
    }

    pub fn residual(&self, c2: f64, c3: f64) -> Result<[f64; 2]> {
        let (w, _) = if self.omega.is_zero() {
            ([0.0; 2], [0.0; 3])
        } else {
            self.omega_terms(c2, c3)?
        };
        Ok([
            self.conics[0].eval(c2, c3) + w[0],
            self.conics[1].eval(c2, c3) + w[1],
        ])
    }

    /// `mu` from `E_2 - E_3`, or least squares over all three equations when
    /// `c3 ~ c2`. Returns `(mu, max_i |E_i|, used_least_squares)`.
    pub fn recover_mu(&self, c: [f64; 3], i: [f64; 3]) -> (f64, f64, bool) {
        let s = self.alpha2 / 4.0;
        let r: Vec<f64> = (0..3)
            .map(|k| i[k] - s * (0..3).map(|j| self.g[k][j] * c[j]).sum::<f64>())
            .collect();
        let (mu, ls) = if (c[2] - c[1]).abs() >= 1e-6 {
            ((r[1] - r[2]) / (c[2] - c[1]), false)
        } else {
            let den: f64 = c.iter().map(|v| v * v).sum();
            (-(0..3).map(|k| c[k] * r[k]).sum::<f64>() / den, true)
        };
        let full = (0..3).map(|k| (r[k] + mu * c[k]).abs()).fold(0.0, f64::max);
        (mu, full, ls)
    }

    pub fn classes(&self) -> [ConicClass; 2] {
        [
            classify_conic(&self.conics[0]),
            classify_conic(&self.conics[1]),
        ]
    }

    fn zero_tol(&self) -> f64 {
        10.0 * self.coefficient_noise
    }

    /// Conics with noise-level coefficients set to zero.
    fn cleaned(&self) -> [Conic; 2] {
        let t = self.zero_tol();
        let z = |v: f64| if v.abs() <= t { 0.0 } else { v };
        self.conics.map(|k| Conic {
            a: z(k.a),
            b: z(k.b),
            c: z(k.c),
            d: z(k.d),
            e: z(k.e),
            f: z(k.f),
        })
    }

    pub fn summary(&self) -> TripleCoefficients {
        TripleCoefficients {
            conics: self.conics,
            printed: self.printed.clone(),
            g: self.g,
            nondegeneracy: self.nondegeneracy,
            alpha2: self.alpha2,
            coefficient_noise: self.coefficient_noise,
            classes: self.classes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleCoefficients {
    pub conics: [Conic; 2],
    pub printed: PrintedTripleCoefficients,
    pub g: [[f64; 3]; 3],
    pub nondegeneracy: f64,
    pub alpha2: f64,
    pub coefficient_noise: f64,
    pub classes: [ConicClass; 2],
}

/// `N = 2`, `k = 2`.
pub fn assemble_triple(
    model: &KernelModel,
    pairs: &EigenPairSet,
    cfg: &SingularQuadConfig,
) -> Result<TripleSystem> {
    if model.dim() != 2 {
        return Err(Error::Unsupported {
            what: "triple system dimension",
            value: model.dim().to_string(),
        });
    }
    cfg.validate()?;
    let basis = [
        MultiIndex::new(vec![2, 0]),
        MultiIndex::new(vec![1, 1]),
        MultiIndex::new(vec![0, 2]),
    ];
    let fields = LevelFields::build(model, pairs, &basis)?;
    // as printed: int psi_1 y.grad psi_1 (no adjoint)
    let plain_c1 = fields.psi[0].dot(&fields.euler[0])?;
    triple_from_fields(Arc::new(fields), cfg.clone(), plain_c1)
}

fn triple_from_fields(
    fields: Arc<LevelFields>,
    cfg: SingularQuadConfig,
    plain_c1: f64,
) -> Result<TripleSystem> {
    let mut g = [[0.0; 3]; 3];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = fields.g[i][j];
        }
    }
    let alpha = alpha_level(2, 2);
    let conics = triple_conics(&g, alpha);
    let printed = printed_triple(&g, alpha, plain_c1, &conics);
    let gmax = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    // each coefficient combines at most eight entries
    let coefficient_noise = alpha / 4.0 * 8.0 * (fields.g_noise + 16.0 * f64::EPSILON * gmax);
    let sys = TripleSystem {
        conics,
        printed,
        nondegeneracy: triple_nondegeneracy(&g),
        g,
        alpha2: alpha,
        coefficient_noise,
        indices: fields.indices.clone(),
        omega: Perturbation::Assembled { fields, cfg },
    };
    let finite = sys
        .conics
        .iter()
        .all(|k| [k.a, k.b, k.c, k.d, k.e, k.f].iter().all(|v| v.is_finite()));
    if !finite || !sys.nondegeneracy.is_finite() {
        return Err(Error::NonFinite(0));
    }
    Ok(sys)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub coefficients: TripleCoefficients,
    /// Conics whose coefficients all vanish to quadrature accuracy.
    pub degenerate: [bool; 2],
    /// Real intersections of the unperturbed conics (all of the plane).
    pub conic_intersections: Vec<[f64; 2]>,
    /// Roots in `[0, 1]^2`.
    pub solutions: Vec<BranchSolution>,
    pub root_count: usize,
    pub structure: SolutionStructure,
    /// Roots of the two conic equations that fail the third equation.
    pub spurious: Vec<[f64; 2]>,
    pub omega_sup: [f64; 2],
    pub perturbation_controlled: bool,
    /// Between one and four roots are expected under perturbation control.
    pub expectation_met: bool,
    /// Smallest over largest Jacobian singular value at each solution.
    pub jacobian_ratios: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Central-difference step for Jacobians of the perturbed system; much larger
/// than the `~1e-7` quadrature noise of `omega` divided by its `O(0.1)` slope.
const FD_STEP: f64 = 1e-3;
const FD_NEWTON_MAX_ITER: usize = 15;
/// Jacobian singular-value ratio below which a root is taken to lie on a curve.
const RANK_RATIO: f64 = 1e-2;

fn in_unit_square(z: [f64; 2], slack: f64) -> bool {
    z.iter().all(|v| (-slack..=1.0 + slack).contains(v))
}

/// Damped Newton with a central-difference Jacobian.
fn newton_fd(
    f: &dyn Fn([f64; 2]) -> Result<[f64; 2]>,
    mut x: [f64; 2],
    tol: f64,
    max_iter: usize,
    fd: f64,
) -> Result<([f64; 2], usize, f64)> {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = f(x)?;
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        if norm(r) <= tol {
            return Ok((x, it, smallest_singular_ratio(f, x, fd)?));
        }
        let mut j = Matrix2::zeros();
        for k in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += fd;
            xm[k] -= fd;
            let (rp, rm) = (f(xp)?, f(xm)?);
            j[(0, k)] = (rp[0] - rm[0]) / (2.0 * fd);
            j[(1, k)] = (rp[1] - rm[1]) / (2.0 * fd);
        }
        let svd = j.svd(true, true);
        let step = svd
            .solve(
                &nalgebra::Vector2::new(r[0], r[1]),
                1e-12 * svd.singular_values[0],
            )
            .map_err(|e| Error::Singular(e.into()))?;
        let mut lambda = 1.0;
        loop {
            let trial = [x[0] - lambda * step[0], x[1] - lambda * step[1]];
            let rt = f(trial)?;
            if norm(rt) < norm(r) || lambda < 1e-3 {
                last = lambda * step.norm();
                x = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
        if !in_unit_square(x, 1.0) {
            return Err(Error::Divergence {
                what: "Newton",
                detail: format!("left the admissible range at {x:?}"),
            });
        }
    }
    if norm(r) <= tol {
        return Ok((x, max_iter, smallest_singular_ratio(f, x, fd)?));
    }
    Err(Error::NoConvergence {
        what: "Newton",
        iterations: max_iter,
        last,
    })
}

fn smallest_singular_ratio(
    f: &dyn Fn([f64; 2]) -> Result<[f64; 2]>,
    x: [f64; 2],
    fd: f64,
) -> Result<f64> {
    let mut j = DMatrix::zeros(2, 2);
    for k in 0..2 {
        let (mut xp, mut xm) = (x, x);
        xp[k] += fd;
        xm[k] -= fd;
        let (rp, rm) = (f(xp)?, f(xm)?);
        j[(0, k)] = (rp[0] - rm[0]) / (2.0 * fd);
        j[(1, k)] = (rp[1] - rm[1]) / (2.0 * fd);
    }
    let s = j.singular_values();
    Ok(if s[0] == 0.0 { 0.0 } else { s[1] / s[0] })
}

/// Roots of `F_i + omega_i = 0` in `[0, 1]^2`.
pub fn solve_triple(sys: &TripleSystem, opts: &SolveOptions) -> Result<TripleReport> {
    if sys.nondegeneracy.abs() < NONDEGENERACY_THRESHOLD {
        return Err(Error::Invariant(format!(
            "triple nondegeneracy {:e} below {NONDEGENERACY_THRESHOLD:e}",
            sys.nondegeneracy
        )));
    }
    let mut warnings = Vec::new();
    let cleaned = sys.cleaned();
    // a conic whose every coefficient is at noise level carries no information
    let degenerate = cleaned.map(|k| k.scale() == 0.0);
    let mut seeds: Vec<[f64; 2]> = Vec::new();
    let conic_intersections = if degenerate.iter().any(|d| *d) {
        warnings
            .push("a conic vanishes to quadrature accuracy; seeding from the lattice only".into());
        Vec::new()
    } else {
        match intersect(&cleaned[0], &cleaned[1]) {
            Ok(pts) => pts,
            Err(e) => {
                warnings.push(format!("conic intersection: {e}"));
                Vec::new()
            }
        }
    };
    seeds.extend(
        conic_intersections
            .iter()
            .copied()
            .filter(|z| in_unit_square(*z, 0.1)),
    );

    // lattice on [0,1]^2: sup of omega, and local minima of |F + omega|^2 as seeds
    let n = opts.lattice.max(2).min(40);
    let mut omega_sup = [0.0f64; 2];
    let mut log_sup = 0.0f64;
    if !sys.omega.is_zero() {
        let mut vals = vec![vec![f64::NAN; n + 1]; n + 1];
        for (a, row) in vals.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                let (c2, c3) = (a as f64 / n as f64, b as f64 / n as f64);
                match sys.omega_terms(c2, c3) {
                    Ok((w, i)) => {
                        omega_sup = [omega_sup[0].max(w[0].abs()), omega_sup[1].max(w[1].abs())];
                        log_sup = i.iter().fold(log_sup, |m, v| m.max(v.abs()));
                        let r = [
                            sys.conics[0].eval(c2, c3) + w[0],
                            sys.conics[1].eval(c2, c3) + w[1],
                        ];
                        *v = r[0] * r[0] + r[1] * r[1];
                    }
                    Err(Error::NonTransversal { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        for a in 0..=n {
            for b in 0..=n {
                let v = vals[a][b];
                if !v.is_finite() {
                    continue;
                }
                let mut is_min = true;
                for (da, db) in [
                    (-1i64, 0i64),
                    (1, 0),
                    (0, -1),
                    (0, 1),
                    (-1, -1),
                    (1, 1),
                    (-1, 1),
                    (1, -1),
                ] {
                    let (p, q) = (a as i64 + da, b as i64 + db);
                    if p < 0 || q < 0 || p > n as i64 || q > n as i64 {
                        continue;
                    }
                    let w = vals[p as usize][q as usize];
                    if w.is_finite() && w < v {
                        is_min = false;
                    }
                }
                if is_min {
                    seeds.push([a as f64 / n as f64, b as f64 / n as f64]);
                }
            }
        }
    }

    let f = |z: [f64; 2]| sys.residual(z[0], z[1]);
    // quadrature noise in omega bounds how far a perturbed root can be polished
    let root_tol = if sys.omega.is_zero() {
        opts.newton_tol
    } else {
        opts.newton_tol.max(opts.continuum_tol * log_sup.max(1.0))
    };
    let mut roots: Vec<([f64; 2], usize, f64)> = Vec::new();
    for s in seeds {
        let attempt = if sys.omega.is_zero() {
            conic::newton2(
                s,
                |z| Ok([cleaned[0].eval(z[0], z[1]), cleaned[1].eval(z[0], z[1])]),
                |z| {
                    let (p, q) = (
                        cleaned[0].gradient(z[0], z[1]),
                        cleaned[1].gradient(z[0], z[1]),
                    );
                    Ok([p, q])
                },
                opts.newton_tol,
                opts.max_iter,
            )
            .map(|(z, it)| (z, it, 1.0))
        } else {
            newton_fd(
                &f,
                s,
                root_tol,
                opts.max_iter.min(FD_NEWTON_MAX_ITER),
                FD_STEP,
            )
        };
        match attempt {
            Ok((z, it, ratio)) if in_unit_square(z, 1e-12) => {
                let z = [z[0].clamp(0.0, 1.0), z[1].clamp(0.0, 1.0)];
                if !roots
                    .iter()
                    .any(|r| (r.0[0] - z[0]).abs().max((r.0[1] - z[1]).abs()) < 1e-7)
                {
                    roots.push((z, it, ratio));
                }
            }
            Ok(_) => {}
            Err(Error::NonTransversal { .. }) => {}
            Err(e) => warnings.push(format!("seed {s:?}: {e}")),
        }
    }
    roots.sort_by(|u, v| u.0[0].total_cmp(&v.0[0]).then(u.0[1].total_cmp(&v.0[1])));

    let mut solutions = Vec::new();
    let mut spurious = Vec::new();
    let mut controlled = true;
    let mut rank_deficient = 0;
    let mut jacobian_ratios = Vec::new();
    for (z, iters, ratio) in roots {
        let (c2, c3) = (z[0], z[1]);
        let (w, i) = if sys.omega.is_zero() {
            ([0.0; 2], [0.0; 3])
        } else {
            sys.omega_terms(c2, c3)?
        };
        let c = [1.0 - c2 - c3, c2, c3];
        let (mu, full, ls) = sys.recover_mu(c, i);
        let r = [
            sys.conics[0].eval(c2, c3) + w[0],
            sys.conics[1].eval(c2, c3) + w[1],
        ];
        if !sys.omega.is_zero() && full > 10.0 * root_tol {
            spurious.push(z);
            continue;
        }
        if ratio < RANK_RATIO {
            rank_deficient += 1;
        }
        jacobian_ratios.push(ratio);
        for k in 0..2 {
            let fk = sys.conics[k].eval(c2, c3);
            controlled &= omega_sup[k] <= fk.abs().max(sys.zero_tol());
        }
        solutions.push(solution(
            2,
            &sys.indices,
            &c,
            mu,
            r[0].abs().max(r[1].abs()),
            iters,
            ls,
        ));
    }
    let structure = if rank_deficient > 0 || solutions.len() > 4 {
        warnings.push(format!(
            "{rank_deficient} roots with a rank-deficient Jacobian; the roots are not isolated"
        ));
        SolutionStructure::Continuum
    } else {
        SolutionStructure::Isolated
    };
    let root_count = solutions.len();
    Ok(TripleReport {
        coefficients: sys.summary(),
        degenerate,
        conic_intersections,
        root_count,
        expectation_met: !controlled || (1..=4).contains(&root_count),
        solutions,
        structure,
        spurious,
        omega_sup,
        perturbation_controlled: controlled,
        jacobian_ratios,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_quadratics() {
        let sys = DipoleSystem::from_coefficients(1.0, -1.0, 3.0 / 16.0);
        let rep = solve_dipole(&sys, &SolveOptions::default()).unwrap();
        let roots: Vec<f64> = rep
            .solutions
            .iter()
            .map(|s| s.coefficients["(0,1)"])
            .collect();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.25).abs() < 1e-14 && (roots[1] - 0.75).abs() < 1e-14);
        assert_eq!(rep.conditions.predicted, RootCount::Finite(2));
        assert!(rep.conditions.a && rep.conditions.b && rep.conditions.c);
        for s in &rep.solutions {
            assert!((s.coefficient_sum() - 1.0).abs() < 1e-15);
        }

        let double = solve_dipole(
            &DipoleSystem::from_coefficients(1.0, -2.0, 1.0),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(double.solutions.len(), 1);
        assert!((double.solutions[0].coefficients["(0,1)"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn model_mu_matches_equations() {
        // with omega = 0 both E_i vanish at a root for the recovered mu
        let sys = DipoleSystem::from_coefficients(1.0, -1.0, 3.0 / 16.0);
        let rep = solve_dipole(&sys, &SolveOptions::default()).unwrap();
        for s in rep.solutions {
            let c = [s.coefficients["(1,0)"], s.coefficients["(0,1)"]];
            for i in 0..2 {
                let gc = sys.g[i][0] * c[0] + sys.g[i][1] * c[1];
                let e = -sys.alpha1 / 4.0 * gc + s.mu_first * c[i];
                assert!(e.abs() < 1e-12, "{e}");
            }
        }
    }

    #[test]
    fn root_condition_cases() {
        assert_eq!(
            root_conditions(1.0, 0.0, -0.25, 0.0).predicted,
            RootCount::Finite(1)
        );
        assert_eq!(
            root_conditions(1.0, 0.0, 1.0, 0.0).predicted,
            RootCount::Finite(0)
        );
        assert_eq!(
            root_conditions(0.0, 0.0, 0.0, 0.0).predicted,
            RootCount::Continuum
        );
        assert_eq!(
            root_conditions(0.0, 1.0, -0.5, 0.0).predicted,
            RootCount::Finite(1)
        );
    }

    #[test]
    fn triple_conics_expand_the_equations() {
        let mut g = [[0.0; 3]; 3];
        let mut seed = 7u64;
        for v in g.iter_mut().flatten() {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            *v = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        let alpha = 1.0;
        let [p, q] = triple_conics(&g, alpha);
        for &(c2, c3) in &[(0.1, 0.7), (0.4, 0.4), (0.9, 0.05)] {
            let c = [1.0 - c2 - c3, c2, c3];
            let e: Vec<f64> = (0..3)
                .map(|i| -alpha / 4.0 * (0..3).map(|j| g[i][j] * c[j]).sum::<f64>())
                .collect();
            let first = (c3 - c2) * e[0] + c[0] * (e[1] - e[2]);
            let second = c3 * e[1] - c2 * e[2];
            assert!((p.eval(c2, c3) - first).abs() < 1e-15);
            assert!((q.eval(c2, c3) - second).abs() < 1e-15);
        }
        // printed second conic agrees with the derivation
        let pr = printed_triple(&g, alpha, 0.0, &[p, q]);
        for (x, y) in [
            (pr.conics[1].a, q.a),
            (pr.conics[1].b, q.b),
            (pr.conics[1].c, q.c),
            (pr.conics[1].d, q.d),
            (pr.conics[1].e, q.e),
        ] {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((pr.conics[0].a - p.a).abs() < 1e-15 && (pr.conics[0].d - p.d).abs() < 1e-15);
    }

    #[test]
    fn model_triple_circle_and_line() {
        let circle = Conic {
            a: 1.0,
            b: 1.0,
            f: -1.0,
            ..Default::default()
        };
        let line = Conic {
            c: 1.0,
            d: -1.0,
            ..Default::default()
        };
        let rep = solve_triple(
            &TripleSystem::from_conics(circle, line),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.conic_intersections.len(), 2);
        assert_eq!(rep.root_count, 1);
        let s = &rep.solutions[0];
        assert!((s.coefficients["(1,1)"] - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((s.coefficient_sum() - 1.0).abs() < 1e-15);

        let outer = Conic {
            a: 1.0,
            b: 1.0,
            f: -4.0,
            ..Default::default()
        };
        let none = solve_triple(
            &TripleSystem::from_conics(circle, outer),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(none.root_count, 0);
    }
}
