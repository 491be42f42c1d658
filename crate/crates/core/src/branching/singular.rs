//! Integrals of `q ln|g|` where `g` has isolated transversal zeros.
//!
//! Elements (1D cells, or the two triangles of each 2D cell) near a zero of
//! `g` are integrated by product integration against the linear interpolants
//! of `g` and `q`; elsewhere the same interpolant model is integrated with
//! Gauss-Legendre, where the logarithm is smooth. The band `|g|/|grad g| < delta` is removed analytically,
//! using the local polynomial of the piece that carries the zero, so each
//! level is exactly `a0 + a1 delta ln delta + a2 delta + O(delta^3 ln delta)`
//! and Richardson extrapolation drives the band width to zero.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};

/// Relative size below which `g` is treated as round-off when checking
/// transversality.
const NOISE_FLOOR: f64 = 1e-12;
/// Elements whose zero distance is under this many element widths get
/// product integration.
const NEAR_ELEMENTS: f64 = 50.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularQuadConfig {
    /// Largest band half-width `delta`, in units of `y`.
    pub exclusion_radius: f64,
    /// Number of halvings of `delta` used for extrapolation.
    pub extrapolation_levels: usize,
}

impl Default for SingularQuadConfig {
    fn default() -> Self {
        SingularQuadConfig {
            exclusion_radius: 0.01,
            extrapolation_levels: 3,
        }
    }
}

impl SingularQuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.exclusion_radius > 0.0)
            || self.extrapolation_levels < 2
            || self.extrapolation_levels > 5
        {
            return Err(Error::config(format!(
                "singular quadrature needs exclusion_radius > 0 and 2..=5 levels, got {} / {}",
                self.exclusion_radius, self.extrapolation_levels
            )));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.extrapolation_levels)
            .map(|j| self.exclusion_radius / f64::powi(2.0, j as i32))
            .collect()
    }

    pub fn halved(&self) -> Self {
        SingularQuadConfig {
            exclusion_radius: self.exclusion_radius / 2.0,
            ..self.clone()
        }
    }
}

/// `int weight_grad . flux ln|log_arg|` with vector fields given by components.
pub fn singular_inner_product(
    weight_grad: &[SampledField],
    log_arg: &SampledField,
    flux: &[SampledField],
    cfg: &SingularQuadConfig,
) -> Result<f64> {
    if weight_grad.len() != flux.len() || weight_grad.len() != log_arg.dim() {
        return Err(Error::GridMismatch(
            "vector fields need one component per dimension".into(),
        ));
    }
    let mut q = vec![0.0; log_arg.len()];
    for (w, f) in weight_grad.iter().zip(flux) {
        w.check_same_grid(log_arg)?;
        f.check_same_grid(log_arg)?;
        for (k, qk) in q.iter_mut().enumerate() {
            *qk += w.values[k] * f.values[k];
        }
    }
    Ok(singular_integrals(&[q.as_slice()], log_arg, cfg)?[0])
}

/// `int q_i ln|g|` for several weights sharing one log argument.
pub fn singular_integrals(
    qs: &[&[f64]],
    g: &SampledField,
    cfg: &SingularQuadConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    for q in qs {
        if q.len() != g.len() {
            return Err(Error::GridMismatch(
                "weight length differs from the log argument".into(),
            ));
        }
    }
    check_transversal(g)?;
    let radii = cfg.radii();
    let levels = match &g.grid {
        GridSpec::Uniform1d(a) => integrate_1d(qs, &g.values, a.spacing, &radii),
        GridSpec::Tensor2d { x, y } => {
            integrate_2d(qs, &g.values, x.len, y.len, x.spacing, y.spacing, &radii)
        }
        GridSpec::Radial(_) => {
            return Err(Error::Unsupported {
                what: "singular quadrature grid",
                value: "radial".into(),
            })
        }
    };
    // round-off floor shared by every weight of the call
    let scale = levels.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    levels
        .into_iter()
        .map(|v| extrapolate_with_scale(&radii, &v, scale))
        .collect()
}

/// Richardson extrapolation of `values[j]` taken at band width `radii[j]`.
pub fn extrapolate(radii: &[f64], values: &[f64]) -> Result<f64> {
    extrapolate_with_scale(radii, values, 0.0)
}

/// As [`extrapolate`], treating changes below `1e-13 * scale` as round-off.
pub fn extrapolate_with_scale(radii: &[f64], values: &[f64], scale: f64) -> Result<f64> {
    let n = values.len();
    let changes: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = values.iter().fold(scale, |m, v| m.max(v.abs()));
    let floor = 1e-13 * scale.max(1e-300);
    for w in changes.windows(2) {
        if w[1] > w[0] * 1.05 + floor {
            return Err(Error::Extrapolation { changes });
        }
    }
    if changes.iter().all(|c| *c <= floor) {
        return Ok(values[n - 1]);
    }
    let basis = |d: f64, k: usize| match k {
        0 => 1.0,
        1 => d * d.ln(),
        2 => d,
        3 => d * d * d * d.ln(),
        _ => d * d * d,
    };
    let m = DMatrix::from_fn(n, n, |i, k| basis(radii[i], k));
    let sol = m
        .lu()
        .solve(&DVector::from_column_slice(values))
        .ok_or_else(|| Error::Singular("Richardson system".into()))?;
    Ok(sol[0])
}

/// `int ln|s| (c0 + c1 s + c2 s^2) ds` over `[a, b]` minus `(-tau, tau)`.
fn log_poly(c: [f64; 3], a: f64, b: f64, tau: f64) -> f64 {
    let anti = |s: f64| -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let l = s.abs().ln();
        let mut acc = 0.0;
        let mut p = s;
        for (k, ck) in c.iter().enumerate() {
            let kk = (k + 1) as f64;
            acc += ck * p * (l - 1.0 / kk) / kk;
            p *= s;
        }
        acc
    };
    let mut total = 0.0;
    // left part
    let hi = b.min(-tau);
    if a < hi {
        total += anti(hi) - anti(a);
    }
    let lo = a.max(tau);
    if lo < b {
        total += anti(b) - anti(lo);
    }
    total
}

/// `int_{-tau}^{tau} ln|s| (c0 + c1 s + c2 s^2) ds`; the odd term drops out.
fn band_integral(c: [f64; 3], tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let l = tau.ln();
    2.0 * c[0] * tau * (l - 1.0) + 2.0 * c[2] * tau.powi(3) * (l - 1.0 / 3.0) / 3.0
}

/// Gauss-Legendre on `[0, 1]`: `(node, weight)`.
const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Degree-5 seven-point triangle rule: barycentric point, weight (sum 1).
const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_8;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_2;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

fn safe_ln(g: f64) -> f64 {
    g.abs().max(1e-300).ln()
}

fn near_zero(smin: f64, smax: f64) -> bool {
    smin <= 0.0 && smax >= 0.0 || smin.abs().min(smax.abs()) < NEAR_ELEMENTS * (smax - smin)
}

fn integrate_1d(qs: &[&[f64]], g: &[f64], h: f64, radii: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; radii.len()]; qs.len()];
    for k in 0..g.len() - 1 {
        let (g0, g1) = (g[k], g[k + 1]);
        let slope = (g1 - g0) / h;
        let (smin, smax) = (g0.min(g1), g0.max(g1));
        if slope.abs() > 0.0 && !near_zero(smin, smax) {
            for (qi, q) in qs.iter().enumerate() {
                let mut v = 0.0;
                for (t, w) in GAUSS4 {
                    let ln = (g0 + (g1 - g0) * t).abs().ln();
                    v += w * ln * (q[k] + (q[k + 1] - q[k]) * t);
                }
                let v = v * h;
                out[qi].iter_mut().for_each(|o| *o += v);
            }
        } else if slope.abs() > 0.0 {
            // s = g0 + slope x; q(s) linear; dx = ds / |slope|
            for (qi, q) in qs.iter().enumerate() {
                let dq = (q[k + 1] - q[k]) / (g1 - g0);
                let c = [q[k] - dq * g0, dq, 0.0];
                let full = log_poly(c, smin, smax, 0.0);
                for (l, r) in radii.iter().enumerate() {
                    let band = if smin <= 0.0 && smax >= 0.0 {
                        band_integral(c, r * slope.abs())
                    } else {
                        0.0
                    };
                    out[qi][l] += (full - band) / slope.abs();
                }
            }
        } else {
            let (l0, l1) = (safe_ln(g0), safe_ln(g1));
            for (qi, q) in qs.iter().enumerate() {
                let v = 0.5 * h * (q[k] * l0 + q[k + 1] * l1);
                out[qi].iter_mut().for_each(|o| *o += v);
            }
        }
    }
    out
}

/// Level line `g = s` in a triangle: its length and the two end points as
/// `(edge start, edge end, parameter)`.
struct Section {
    len: f64,
    ends: [(usize, usize, f64); 2],
}

impl Section {
    fn new(p: &[[f64; 2]; 3], g: &[f64; 3], s: f64) -> Option<Section> {
        let mut pts: Vec<([f64; 2], (usize, usize, f64))> = Vec::with_capacity(3);
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let (gi, gj) = (g[i], g[j]);
            if gi == gj || (s - gi) * (s - gj) > 0.0 {
                continue;
            }
            let t = (s - gi) / (gj - gi);
            let pt = [
                p[i][0] + t * (p[j][0] - p[i][0]),
                p[i][1] + t * (p[j][1] - p[i][1]),
            ];
            pts.push((pt, (i, j, t)));
        }
        if pts.len() < 2 {
            return None;
        }
        // farthest pair handles a level line through a vertex
        let (mut best, mut pair) = (-1.0, (0, 1));
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = (pts[a].0[0] - pts[b].0[0]).hypot(pts[a].0[1] - pts[b].0[1]);
                if d > best {
                    best = d;
                    pair = (a, b);
                }
            }
        }
        Some(Section {
            len: best,
            ends: [pts[pair.0].1, pts[pair.1].1],
        })
    }

    /// Length-weighted integral of the linear interpolant of `q`.
    fn integrate(&self, q: &[f64; 3]) -> f64 {
        let at = |(i, j, t): (usize, usize, f64)| q[i] + t * (q[j] - q[i]);
        self.len * 0.5 * (at(self.ends[0]) + at(self.ends[1]))
    }
}

/// Quadratic through three samples, returned in monomial form in `s`.
fn fit_quadratic(s: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let denom = (s[i] - s[j]) * (s[i] - s[k]);
        let w = v[i] / denom;
        c[0] += w * s[j] * s[k];
        c[1] -= w * (s[j] + s[k]);
        c[2] += w;
    }
    c
}

fn triangle(
    p: [[f64; 2]; 3],
    g: [f64; 3],
    qs: &[[f64; 3]],
    area: f64,
    radii: &[f64],
    out: &mut [Vec<f64>],
) {
    let smin = g[0].min(g[1]).min(g[2]);
    let smax = g[0].max(g[1]).max(g[2]);
    // gradient of the linear interpolant
    let (e1, e2) = (
        [p[1][0] - p[0][0], p[1][1] - p[0][1]],
        [p[2][0] - p[0][0], p[2][1] - p[0][1]],
    );
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    let (d1, d2) = (g[1] - g[0], g[2] - g[0]);
    let grad = [
        (d1 * e2[1] - d2 * e1[1]) / det,
        (d2 * e1[0] - d1 * e2[0]) / det,
    ];
    let gn = grad[0].hypot(grad[1]);
    if gn > 0.0 && smax > smin && !near_zero(smin, smax) {
        for (qi, q) in qs.iter().enumerate() {
            let mut v = 0.0;
            for (b, w) in TRI7 {
                let gv = b[0] * g[0] + b[1] * g[1] + b[2] * g[2];
                v += w * gv.abs().ln() * (b[0] * q[0] + b[1] * q[1] + b[2] * q[2]);
            }
            let v = v * area;
            out[qi].iter_mut().for_each(|o| *o += v);
        }
    } else if gn > 0.0 && smax > smin {
        // `area` may be a fraction of the geometric area when cells are covered twice
        let cover = area / (0.5 * det.abs());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
        let breaks = [g[order[0]], g[order[1]], g[order[2]]];
        let mut pieces: Vec<(f64, f64, [f64; 3], [Option<Section>; 3])> = Vec::with_capacity(2);
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            // slivers a few ulps wide carry nothing but cancellation in the fit
            if hi - lo <= 1e-10 * (smax - smin) {
                continue;
            }
            let ss = [lo + 0.1 * (hi - lo), 0.5 * (lo + hi), lo + 0.9 * (hi - lo)];
            pieces.push((lo, hi, ss, ss.map(|s| Section::new(&p, &g, s))));
        }
        for (qi, q) in qs.iter().enumerate() {
            let mut full = 0.0;
            let mut zero_piece = None;
            for (lo, hi, ss, sections) in &pieces {
                let vals =
                    [0, 1, 2].map(|k| sections[k].as_ref().map_or(0.0, |sec| sec.integrate(q)));
                let c = fit_quadratic(*ss, vals);
                full += log_poly(c, *lo, *hi, 0.0);
                if zero_piece.is_none() && *lo <= 0.0 && *hi >= 0.0 {
                    zero_piece = Some(c);
                }
            }
            for (l, r) in radii.iter().enumerate() {
                let band = zero_piece.map_or(0.0, |c| band_integral(c, r * gn));
                out[qi][l] += cover * (full - band) / gn;
            }
        }
    } else {
        let l = [safe_ln(g[0]), safe_ln(g[1]), safe_ln(g[2])];
        for (qi, q) in qs.iter().enumerate() {
            let v = area / 3.0 * (q[0] * l[0] + q[1] * l[1] + q[2] * l[2]);
            out[qi].iter_mut().for_each(|o| *o += v);
        }
    }
}

fn integrate_2d(
    qs: &[&[f64]],
    g: &[f64],
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    radii: &[f64],
) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; radii.len()]; qs.len()];
    // each cell is covered twice
    let area = 0.25 * hx * hy;
    let mut qv = vec![[0.0; 3]; qs.len()];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let idx = [
                j * nx + i,
                j * nx + i + 1,
                (j + 1) * nx + i + 1,
                (j + 1) * nx + i,
            ];
            let corners = [[0.0, 0.0], [hx, 0.0], [hx, hy], [0.0, hy]];
            // both diagonals, so the rule keeps the reflection symmetries of the grid
            for tri in [[0usize, 1, 2], [0, 2, 3], [0, 1, 3], [1, 2, 3]] {
                let p = tri.map(|t| corners[t]);
                let gv = tri.map(|t| g[idx[t]]);
                for (qi, q) in qs.iter().enumerate() {
                    qv[qi] = tri.map(|t| q[idx[t]]);
                }
                triangle(p, gv, &qv, area, radii, &mut out);
            }
        }
    }
    out
}

/// Rejects sign changes of `g` closer than three cells on a line, and on a
/// plane grid any three sign changes within three cells of a row or column.
/// Values below the noise floor are ignored.
pub fn check_transversal(g: &SampledField) -> Result<()> {
    let floor = NOISE_FLOOR * g.max_abs();
    let changes = |vals: &mut dyn Iterator<Item = f64>| -> Vec<usize> {
        let mut out = Vec::new();
        let mut last: Option<(usize, f64)> = None;
        for (k, v) in vals.enumerate() {
            if v.abs() <= floor {
                continue;
            }
            if let Some((_, lv)) = last {
                if lv * v < 0.0 {
                    out.push(k);
                }
            }
            last = Some((k, v));
        }
        out
    };
    let crowded = |c: &[usize]| -> Vec<usize> {
        let mut out = Vec::new();
        for w in c.windows(2) {
            if w[1] - w[0] < 3 {
                out.push(w[0]);
                out.push(w[1]);
            }
        }
        out
    };
    match &g.grid {
        GridSpec::Uniform1d(_) | GridSpec::Radial(_) => {
            if let Some(&k) = crowded(&changes(&mut g.values.iter().copied())).first() {
                return Err(Error::NonTransversal { index: k });
            }
        }
        GridSpec::Tensor2d { x, y } => {
            // crossings of nodal curves are allowed; grid-scale oscillation is not
            let (nx, ny) = (x.len, y.len);
            let oscillating = |c: &[usize]| c.windows(3).find(|w| w[2] - w[0] < 3).map(|w| w[1]);
            for j in 0..ny {
                if let Some(k) = oscillating(&changes(
                    &mut g.values[j * nx..(j + 1) * nx].iter().copied(),
                )) {
                    return Err(Error::NonTransversal { index: j * nx + k });
                }
            }
            for i in 0..nx {
                if let Some(k) = oscillating(&changes(&mut (0..ny).map(|j| g.values[j * nx + i]))) {
                    return Err(Error::NonTransversal { index: k * nx + i });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_poly_matches_closed_form() {
        // int_{-1}^{1} ln|s| ds = -2
        assert!((log_poly([1.0, 0.0, 0.0], -1.0, 1.0, 0.0) + 2.0).abs() < 1e-15);
        // int_0^1 s^2 ln s ds = -1/9
        assert!((log_poly([0.0, 0.0, 1.0], 0.0, 1.0, 0.0) + 1.0 / 9.0).abs() < 1e-15);
        // band removal: int_{0.1}^{1} ln s = -0.9 - 0.1 ln 0.1 + 0.1... check against direct
        let want = (1.0f64.ln() - 1.0) - 0.1 * (0.1f64.ln() - 1.0);
        assert!((log_poly([1.0, 0.0, 0.0], 0.0, 1.0, 0.1) - want).abs() < 1e-15);
    }

    #[test]
    fn band_matches_log_poly() {
        let c = [0.7, -1.3, 2.1];
        let tau = 0.037;
        assert!((band_integral(c, tau) - log_poly(c, -tau, tau, 0.0)).abs() < 1e-16);
    }

    #[test]
    fn quadratic_fit_exact() {
        let c = fit_quadratic(
            [0.1, 0.4, 0.9],
            [1.0 + 0.2 + 0.03, 1.0 + 0.8 + 0.48, 1.0 + 1.8 + 2.43],
        );
        assert!(
            (c[0] - 1.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12 && (c[2] - 3.0).abs() < 1e-12
        );
    }

    #[test]
    fn no_zeros_needs_no_band() {
        let g = GridSpec::line(1.0, 0.01).unwrap();
        let arg = SampledField::from_fn(g.clone(), |p| 2.0 + p[0]).unwrap();
        let q: Vec<f64> = vec![1.0; g.len()];
        let cfg = SingularQuadConfig::default();
        let got = singular_integrals(&[&q], &arg, &cfg).unwrap()[0];
        assert_eq!(
            got,
            singular_integrals(&[&q], &arg, &cfg.halved()).unwrap()[0]
        );
        // int_{-1}^{1} ln(2 + y) dy = 3 ln 3 - 2
        assert!((got - (3.0 * 3.0f64.ln() - 2.0)).abs() < 1e-12, "{got}");
    }

    #[test]
    fn zero_weight_is_zero() {
        let g = GridSpec::line(1.0, 0.01).unwrap();
        let arg = SampledField::from_fn(g.clone(), |p| p[0]).unwrap();
        let z = SampledField::zeros(g);
        let v = singular_inner_product(&[z.clone()], &arg, &[z], &SingularQuadConfig::default())
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn crowded_zeros_rejected() {
        let g = GridSpec::line(1.0, 0.01).unwrap();
        let arg = SampledField::from_fn(g, |p| (p[0] - 0.2) * (p[0] - 0.215)).unwrap();
        let q = vec![1.0; arg.len()];
        assert!(matches!(
            singular_integrals(&[&q], &arg, &SingularQuadConfig::default()),
            Err(Error::NonTransversal { .. })
        ));
    }

    #[test]
    fn planar_log_integral() {
        // int over [-1,1]^2 of ln|y1 - 0.3 y2 + 0.05|, reference by 1D exact
        // integration in y1 and dense Gauss in y2
        let grid = GridSpec::square(1.0, 0.02).unwrap();
        let arg = SampledField::from_fn(grid.clone(), |p| p[0] - 0.3 * p[1] + 0.05).unwrap();
        let q = vec![1.0; grid.len()];
        let got = singular_integrals(&[&q], &arg, &SingularQuadConfig::default()).unwrap()[0];
        // cell-centered grid covers [-0.99, 0.99]^2
        let (a, b) = (-0.99, 0.99);
        let (xs, ws) = crate::quadrature::composite(a, b, 64, 16);
        let mut want = 0.0;
        for (y, w) in xs.iter().zip(&ws) {
            let sh = -0.3 * y + 0.05;
            want += w * log_poly([1.0, 0.0, 0.0], a + sh, b + sh, 0.0);
        }
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn delta_halving_is_stable() {
        let grid = GridSpec::square(1.0, 0.05).unwrap();
        let arg = SampledField::from_fn(grid.clone(), |p| p[0] * p[0] + p[1] * p[1] - 0.4).unwrap();
        let q: Vec<f64> = (0..grid.len()).map(|i| 1.0 + grid.point(i)[0]).collect();
        let cfg = SingularQuadConfig::default();
        let a = singular_integrals(&[&q], &arg, &cfg).unwrap()[0];
        let b = singular_integrals(&[&q], &arg, &cfg.halved()).unwrap()[0];
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }

    #[test]
    fn ulp_noise_near_a_flat_minimum() {
        // positive g whose spread per triangle is close to its size; a few
        // ulps of noise create level slivers that must not blow up the fit
        let grid = GridSpec::square(1.0, 0.02).unwrap();
        let clean =
            SampledField::from_fn(grid.clone(), |p| 1e-9 + 1e-7 * (p[0] * p[0] + p[1] * p[1]))
                .unwrap();
        let mut noisy = clean.clone();
        for (i, v) in noisy.values.iter_mut().enumerate() {
            *v *= 1.0 + ((i * 7) % 3) as f64 * f64::EPSILON;
        }
        let q = vec![1.0; grid.len()];
        let cfg = SingularQuadConfig::default();
        let a = singular_integrals(&[&q], &clean, &cfg).unwrap()[0];
        let b = singular_integrals(&[&q], &noisy, &cfg).unwrap()[0];
        assert!((a - b).abs() < 1e-9 * a.abs(), "{a} {b}");
        // smooth integrand: tensor Gauss reference over the covered square
        let (xs, ws) = crate::quadrature::composite(-0.99, 0.99, 32, 16);
        let mut want = 0.0;
        for (x, wx) in xs.iter().zip(&ws) {
            for (y, wy) in xs.iter().zip(&ws) {
                want += wx * wy * (1e-9 + 1e-7 * (x * x + y * y)).ln();
            }
        }
        assert!((a - want).abs() < 1e-4 * want.abs(), "{a} vs {want}");
    }
}
