//! Plane conics `a x^2 + b y^2 + c x + d y + e x y + f = 0` in the unknowns
//! `(x, y) = (c2, c3)`: classification and pairwise intersection.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient names follow the branching system: `a c2^2 + b c3^2 + c c2 +
/// d c3 + e c2 c3 + f`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Conic {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * y * y + self.c * x + self.d * y + self.e * x * y + self.f
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [
            2.0 * self.a * x + self.c + self.e * y,
            2.0 * self.b * y + self.d + self.e * x,
        ]
    }

    pub fn scale(&self) -> f64 {
        [self.a, self.b, self.c, self.d, self.e, self.f]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.a,
            self.e / 2.0,
            self.c / 2.0,
            self.e / 2.0,
            self.b,
            self.d / 2.0,
            self.c / 2.0,
            self.d / 2.0,
            self.f,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConicKind {
    Ellipse,
    Circle,
    Parabola,
    Hyperbola,
    Degenerate,
}

/// Sign class of the quadratic part alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormClass {
    Definite,
    Semidefinite,
    Indefinite,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicClass {
    pub kind: ConicKind,
    /// `e^2 - 4ab`.
    pub discriminant: f64,
    pub form: FormClass,
    /// Determinant of the symmetric 3x3 conic matrix.
    pub determinant: f64,
}

const REL_TOL: f64 = 1e-12;

pub fn classify_conic(k: &Conic) -> ConicClass {
    let disc = k.e * k.e - 4.0 * k.a * k.b;
    let qscale = k.a.abs().max(k.b.abs()).max(k.e.abs());
    let scale = k.scale();
    let det = k.matrix().determinant();
    let form = if qscale == 0.0 {
        FormClass::Zero
    } else if disc.abs() <= REL_TOL * qscale * qscale {
        FormClass::Semidefinite
    } else if disc < 0.0 {
        FormClass::Definite
    } else {
        FormClass::Indefinite
    };
    let degenerate = det.abs() <= REL_TOL * scale.powi(3);
    let kind = match form {
        FormClass::Zero => ConicKind::Degenerate,
        _ if degenerate => ConicKind::Degenerate,
        FormClass::Semidefinite => ConicKind::Parabola,
        FormClass::Indefinite => ConicKind::Hyperbola,
        FormClass::Definite => {
            // a * det > 0 means no real points
            if k.a * det > 0.0 {
                ConicKind::Degenerate
            } else if k.a == k.b && k.e == 0.0 {
                ConicKind::Circle
            } else {
                ConicKind::Ellipse
            }
        }
    };
    ConicClass {
        kind,
        discriminant: disc,
        form,
        determinant: det,
    }
}

// polynomials in x, lowest degree first
fn pmul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn psub(p: &[f64], q: &[f64]) -> Vec<f64> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn padd(p: &[f64], q: &[f64]) -> Vec<f64> {
    psub(p, &q.iter().map(|v| -v).collect::<Vec<_>>())
}

/// Coefficients in `y`: `[p0(x), p1(x), p2(x)]` with `p_k` polynomials in x.
fn in_y(k: &Conic) -> [Vec<f64>; 3] {
    [vec![k.f, k.c, k.a], vec![k.d, k.e], vec![k.b]]
}

fn y_degree(k: &Conic, tol: f64) -> usize {
    if k.b.abs() > tol {
        2
    } else if k.d.abs() > tol || k.e.abs() > tol {
        1
    } else {
        0
    }
}

/// Resultant of the two conics with respect to `y`, a polynomial in `x` of
/// degree at most four.
pub fn resultant(p: &Conic, q: &Conic) -> Vec<f64> {
    let tol = REL_TOL * p.scale().max(q.scale());
    let (dp, dq) = (y_degree(p, tol), y_degree(q, tol));
    let [p0, p1, p2] = in_y(p);
    let [q0, q1, q2] = in_y(q);
    let pow = |v: &[f64], n: usize| (0..n).fold(vec![1.0], |acc, _| pmul(&acc, v));
    match (dp, dq) {
        (2, 2) => {
            let s = psub(&pmul(&p2, &q0), &pmul(&q2, &p0));
            let t = psub(&pmul(&p2, &q1), &pmul(&q2, &p1));
            let u = psub(&pmul(&p1, &q0), &pmul(&q1, &p0));
            psub(&pmul(&s, &s), &pmul(&t, &u))
        }
        (2, 1) => padd(
            &psub(&pmul(&p2, &pmul(&q0, &q0)), &pmul(&p1, &pmul(&q0, &q1))),
            &pmul(&p0, &pmul(&q1, &q1)),
        ),
        (1, 2) => resultant(q, p),
        (1, 1) => psub(&pmul(&p1, &q0), &pmul(&q1, &p0)),
        (0, n) => pow(&p0, n),
        (n, 0) => pow(&q0, n),
        _ => unreachable!(),
    }
}

/// Real roots of a polynomial (lowest degree first) via companion-matrix
/// eigenvalues.
pub fn real_roots(poly: &[f64]) -> Result<Vec<f64>> {
    let scale = poly.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut p: Vec<f64> = poly.to_vec();
    while p.len() > 1 && p.last().unwrap().abs() <= 1e-13 * scale {
        p.pop();
    }
    let n = p.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    // The unshifted QR iteration can stall on structured companion matrices
    // (even polynomials); retry with the variable shifted off the symmetry.
    let eig = [0.0, 0.3183098861837907, -0.5772156649015329]
        .iter()
        .find_map(|&s| {
            companion_eigenvalues(&taylor_shift(&p, s))
                .map(|e| e.into_iter().map(|z| z + s).collect::<Vec<_>>())
        })
        .ok_or_else(|| Error::NoConvergence {
            what: "companion eigenvalues",
            iterations: SCHUR_MAX_ITER,
            last: f64::NAN,
        })?;
    let eval = |x: f64| p.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let deriv = |x: f64| {
        p.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
    };
    let mut out: Vec<f64> = Vec::new();
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut x = z.re;
        for _ in 0..20 {
            let d = deriv(x);
            if d == 0.0 {
                break;
            }
            let step = eval(x) / d;
            x -= step;
            if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
        out.push(x);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

const SCHUR_MAX_ITER: usize = 500;

/// Coefficients of `p(t + s)`, lowest degree first.
fn taylor_shift(p: &[f64], s: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            q[j] += s * q[j + 1];
        }
    }
    q
}

fn companion_eigenvalues(p: &[f64]) -> Option<Vec<nalgebra::Complex<f64>>> {
    let n = p.len() - 1;
    let lead = p[n];
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -p[i] / lead;
    }
    let schur = comp.try_schur(f64::EPSILON, SCHUR_MAX_ITER)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-14 * b * b.max(1.0) {
        return Vec::new();
    }
    let sq = disc.max(0.0).sqrt();
    let qq = -0.5 * (b + b.signum() * sq);
    if qq == 0.0 {
        return vec![0.0];
    }
    vec![qq / a, c / qq]
}

/// Newton on the 2x2 system `F(x, y) = 0` with a user Jacobian.
pub fn newton2(
    mut x: [f64; 2],
    f: impl Fn([f64; 2]) -> Result<[f64; 2]>,
    jac: impl Fn([f64; 2]) -> Result<[[f64; 2]; 2]>,
    tol: f64,
    max_iter: usize,
) -> Result<([f64; 2], usize)> {
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        let r = f(x)?;
        let res = r[0].abs().max(r[1].abs());
        if res <= tol {
            return Ok((x, it));
        }
        let j = jac(x)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("Newton Jacobian".into()));
        }
        let dx = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dy = (r[1] * j[0][0] - r[0] * j[1][0]) / det;
        x = [x[0] - dx, x[1] - dy];
        last = dx.abs().max(dy.abs());
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(Error::Divergence {
                what: "Newton",
                detail: "non-finite iterate".into(),
            });
        }
    }
    let r = f(x)?;
    if r[0].abs().max(r[1].abs()) <= tol {
        return Ok((x, max_iter));
    }
    Err(Error::NoConvergence {
        what: "Newton",
        iterations: max_iter,
        last,
    })
}

/// Real intersection points of two conics: resultant in `y`, real roots in
/// `x`, back-substitution, Newton polish, de-duplication.
pub fn intersect(p: &Conic, q: &Conic) -> Result<Vec<[f64; 2]>> {
    let res = resultant(p, q);
    let rscale = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = p.scale().max(q.scale());
    if scale == 0.0 || rscale <= 1e-14 * scale.powi(4) {
        return Err(Error::InsufficientData(
            "conics share a component (resultant vanishes)".into(),
        ));
    }
    let f = |z: [f64; 2]| {
        Ok([
            p.eval(z[0], z[1]) / p.scale(),
            q.eval(z[0], z[1]) / q.scale(),
        ])
    };
    let jac = |z: [f64; 2]| {
        let (gp, gq) = (p.gradient(z[0], z[1]), q.gradient(z[0], z[1]));
        Ok([
            [gp[0] / p.scale(), gp[1] / p.scale()],
            [gq[0] / q.scale(), gq[1] / q.scale()],
        ])
    };
    let mut found: Vec<[f64; 2]> = Vec::new();
    for x in real_roots(&res)? {
        let mut ys = Vec::new();
        for k in [p, q] {
            let [k0, k1, k2] = in_y(k);
            let e = |v: &[f64]| v.iter().rev().fold(0.0, |acc, c| acc * x + c);
            ys.extend(quadratic_roots(e(&k2), e(&k1), e(&k0)));
        }
        for y in ys {
            let r = f([x, y])?;
            if r[0].abs().max(r[1].abs()) > 1e-4 {
                continue;
            }
            let z = match newton2([x, y], f, jac, 1e-15, 30) {
                Ok((z, _)) => z,
                Err(_) => [x, y],
            };
            let r = f(z)?;
            if r[0].abs().max(r[1].abs()) > 1e-10 {
                continue;
            }
            if !found.iter().any(|w| {
                (w[0] - z[0]).abs() + (w[1] - z[1]).abs() < 1e-7 * (1.0 + z[0].abs() + z[1].abs())
            }) {
                found.push(z);
            }
        }
    }
    found.sort_by(|u, v| u[0].total_cmp(&v[0]).then(u[1].total_cmp(&v[1])));
    if found.len() > 4 {
        return Err(Error::Invariant(format!(
            "{} intersections of two conics",
            found.len()
        )));
    }
    Ok(found)
}
