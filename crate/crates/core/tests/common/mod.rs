//! Independent oracles shared by the integration tests.

use simfilm::branching::{Conic, ConicKind};

/// Sign pattern of the quadratic part over 3600 directions, and for a
/// one-signed part whether the conic changes sign at its center.
pub fn scan_kind(k: &Conic) -> ConicKind {
    let (mut pos, mut neg) = (false, false);
    for j in 0..3600 {
        let t = j as f64 * std::f64::consts::PI / 3600.0;
        let (x, y) = (t.cos(), t.sin());
        let q = k.a * x * x + k.b * y * y + k.e * x * y;
        pos |= q > 0.0;
        neg |= q < 0.0;
    }
    if pos && neg {
        return ConicKind::Hyperbola;
    }
    // center: grad = 0
    let det = 4.0 * k.a * k.b - k.e * k.e;
    let cx = (-2.0 * k.b * k.c + k.e * k.d) / det;
    let cy = (-2.0 * k.a * k.d + k.e * k.c) / det;
    let mid = k.eval(cx, cy);
    if (pos && mid < 0.0) || (neg && mid > 0.0) {
        ConicKind::Ellipse
    } else {
        ConicKind::Degenerate
    }
}

/// Intersections inside `[-r, r]^2`: walk the branches of `p` solved for
/// `y` (and, swapped, for `x`) on a fine grid and bisect sign changes of `q`.
/// A root is kept from the parametrization in which it is well conditioned.
pub fn scan_intersections(p: &Conic, q: &Conic, r: f64) -> Vec<[f64; 2]> {
    let swap = |k: &Conic| Conic {
        a: k.b,
        b: k.a,
        c: k.d,
        d: k.c,
        e: k.e,
        f: k.f,
    };
    let mut out: Vec<[f64; 2]> = Vec::new();
    for (pp, qq, swapped) in [(*p, *q, false), (swap(p), swap(q), true)] {
        if pp.b.abs() < 0.1 {
            continue;
        }
        let branch = |x: f64, s: f64| -> Option<f64> {
            let (a2, a1, a0) = (pp.b, pp.d + pp.e * x, pp.a * x * x + pp.c * x + pp.f);
            let disc = a1 * a1 - 4.0 * a2 * a0;
            (disc >= 0.0).then(|| (-a1 + s * disc.sqrt()) / (2.0 * a2))
        };
        let n = 200_000;
        let h = 2.0 * r / n as f64;
        for s in [-1.0, 1.0] {
            let g = |x: f64| branch(x, s).map(|y| qq.eval(x, y));
            for i in 0..n {
                let (x0, x1) = (-r + i as f64 * h, -r + (i + 1) as f64 * h);
                let (Some(g0), Some(g1)) = (g(x0), g(x1)) else {
                    continue;
                };
                if g0 * g1 > 0.0 {
                    continue;
                }
                let (mut lo, mut hi, mut glo) = (x0, x1, g0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let Some(gm) = g(mid) else { break };
                    if gm * glo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        glo = gm;
                    }
                    if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
                        break;
                    }
                }
                let x = 0.5 * (lo + hi);
                let y = branch(x, s).unwrap();
                let grad = pp.gradient(x, y);
                if y.abs() >= r || grad[1].abs() < grad[0].abs() {
                    continue;
                }
                let z = if swapped { [y, x] } else { [x, y] };
                if !out
                    .iter()
                    .any(|w| (w[0] - z[0]).abs() + (w[1] - z[1]).abs() < 1e-9)
                {
                    out.push(z);
                }
            }
        }
    }
    out
}
