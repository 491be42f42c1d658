//! Banded LU with partial pivoting, and a cyclic banded solve via a
//! Woodbury correction on the wrap-around corners.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage keeps `kl` extra super-diagonals for pivoting fill-in, as in LAPACK.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major: row `i` holds columns `i - kl ..= i + ku + kl`.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * (2 * kl + ku + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return None;
        }
        Some(i * self.width() + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map(|s| self.data[s]).unwrap_or(0.0)
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "({i},{j}) outside band"
        );
        let s = self.slot(i, j).unwrap();
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Clears row `i` (used to impose point conditions).
    pub fn clear_row(&mut self, i: usize) {
        let w = self.width();
        self.data[i * w..(i + 1) * w]
            .iter_mut()
            .for_each(|v| *v = 0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU with row pivoting; the matrix is consumed.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let reach = self.ku + self.kl;
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::Singular("zero banded matrix".into()));
        }
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 || best < scale * 1e-15 {
                return Err(Error::Singular(format!("pivot {best:e} in column {k}")));
            }
            piv[k] = p;
            let cols = (k + reach).min(n - 1);
            if p != k {
                for j in k..=cols {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    let (sk, sp) = (self.slot(k, j).unwrap(), self.slot(p, j));
                    self.data[sk] = b;
                    if let Some(sp) = sp {
                        self.data[sp] = a;
                    } else {
                        debug_assert_eq!(a, 0.0);
                    }
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let si = self.slot(i, k).unwrap();
                let l = self.data[si] / pivot;
                self.data[si] = l;
                if l != 0.0 {
                    for j in k + 1..=cols {
                        let u = self.get(k, j);
                        if u != 0.0 {
                            let s = self.slot(i, j).unwrap();
                            self.data[s] -= l * u;
                        }
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

#[derive(Clone, Debug)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.m.n;
        let (kl, reach) = (self.m.kl, self.m.ku + self.m.kl);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.m.get(i, k) * b[k];
            }
        }
        for k in (0..n).rev() {
            let cols = (k + reach).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=cols {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `min |u_kk| / max |u_kk|`, a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let (lo, hi) = (0..self.m.n)
            .map(|k| self.m.get(k, k).abs())
            .fold((f64::MAX, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }
}

/// Periodic matrix with half-bandwidth `p`: `a(i, i + o)` for `|o| <= p`,
/// indices taken mod `n`.
#[derive(Clone, Debug)]
pub struct CyclicBanded {
    n: usize,
    p: usize,
    /// `rows[i][o + p] = a(i, (i + o) mod n)`.
    rows: Vec<Vec<f64>>,
}

impl CyclicBanded {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n < 2 * p + 2 {
            return Err(Error::config(format!(
                "cyclic system of size {n} too small for half-bandwidth {p}"
            )));
        }
        Ok(CyclicBanded {
            n,
            p,
            rows: vec![vec![0.0; 2 * p + 1]; n],
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, i: usize, offset: isize, v: f64) {
        let k = (offset + self.p as isize) as usize;
        self.rows[i][k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n as isize;
        (0..self.n)
            .map(|i| {
                self.rows[i]
                    .iter()
                    .enumerate()
                    .map(|(k, a)| {
                        a * x[(i as isize + k as isize - self.p as isize).rem_euclid(n) as usize]
                    })
                    .sum()
            })
            .collect()
    }

    /// Solves `A x = b`. The interior band is factored directly; the corner
    /// entries are a rank-`2p` update handled by Woodbury.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (n, p) = (self.n, self.p);
        let mut band = BandedMatrix::zeros(n, p, p);
        // corner rows: (row, column, value) entries that wrap
        let mut corner_rows: Vec<usize> = Vec::new();
        let mut wraps: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..n {
            for (k, &a) in self.rows[i].iter().enumerate() {
                let j = i as isize + k as isize - p as isize;
                if (0..n as isize).contains(&j) {
                    band.add(i, j as usize, a);
                } else if a != 0.0 {
                    wraps.push((i, j.rem_euclid(n as isize) as usize, a));
                    if corner_rows.last() != Some(&i) {
                        corner_rows.push(i);
                    }
                }
            }
        }
        let lu = band.factor()?;
        let y = lu.solve(b);
        if corner_rows.is_empty() {
            return Ok(y);
        }
        let r = corner_rows.len();
        // Z = B^{-1} U with U = [e_row]
        let mut z = Vec::with_capacity(r);
        for &row in &corner_rows {
            let mut e = vec![0.0; n];
            e[row] = 1.0;
            lu.solve_in_place(&mut e);
            z.push(e);
        }
        // V^T x picks the wrapped part of each corner row
        let vt = |x: &[f64], row: usize| -> f64 {
            wraps
                .iter()
                .filter(|w| w.0 == row)
                .map(|&(_, j, a)| a * x[j])
                .sum()
        };
        let mut cap = DMatrix::<f64>::identity(r, r);
        for (a, &row) in corner_rows.iter().enumerate() {
            for (c, zc) in z.iter().enumerate() {
                cap[(a, c)] += vt(zc, row);
            }
        }
        let rhs = DVector::from_iterator(r, corner_rows.iter().map(|&row| vt(&y, row)));
        let w = cap
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("Woodbury capacitance matrix".into()))?;
        let mut x = y;
        for (c, zc) in z.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(zc) {
                *xi -= w[c] * zi;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
        a.clone()
            .lu()
            .solve(&DVector::from_column_slice(b))
            .unwrap()
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 7;
        let mut m = BandedMatrix::zeros(n, 1, 1);
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 2.0 + i as f64 * 0.1);
            d[(i, i)] = 2.0 + i as f64 * 0.1;
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
                m.set(i + 1, i, -0.5);
                d[(i, i + 1)] = -1.0;
                d[(i + 1, i)] = -0.5;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = m.factor().unwrap().solve(&b);
        for (u, v) in x.iter().zip(dense_solve(&d, &b)) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn pivoting_needed() {
        // zero on the diagonal forces a row swap
        let mut m = BandedMatrix::zeros(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 0.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 1.0);
        m.set(2, 2, 1.0);
        let x = m.factor().unwrap().solve(&[1.0, 2.0, 3.0]);
        // x1 = 1, x0 + x2 = 2, x1 + x2 = 3
        assert!((x[1] - 1.0).abs() < 1e-15 && (x[2] - 2.0).abs() < 1e-15 && x[0].abs() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let m = BandedMatrix::zeros(4, 1, 1);
        assert!(matches!(m.factor(), Err(Error::Singular(_))));
    }

    proptest! {
        #[test]
        fn random_banded_matches_dense(seed in proptest::collection::vec(-1.0f64..1.0, 60), kl in 0usize..3, ku in 0usize..3) {
            let n = 10;
            let mut m = BandedMatrix::zeros(n, kl, ku);
            let mut d = DMatrix::zeros(n, n);
            let mut it = seed.iter().cycle();
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v = *it.next().unwrap() + if i == j { 4.0 } else { 0.0 };
                    m.set(i, j, v);
                    d[(i, j)] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let x = m.factor().unwrap().solve(&b);
            for (u, v) in x.iter().zip(dense_solve(&d, &b)) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }

        #[test]
        fn cyclic_matches_dense(seed in proptest::collection::vec(-1.0f64..1.0, 50), p in 1usize..3) {
            let n = 12;
            let mut c = CyclicBanded::new(n, p).unwrap();
            let mut d = DMatrix::zeros(n, n);
            let mut it = seed.iter().cycle();
            for i in 0..n {
                for o in -(p as isize)..=p as isize {
                    let v = *it.next().unwrap() + if o == 0 { 6.0 } else { 0.0 };
                    c.add(i, o, v);
                    d[(i, (i as isize + o).rem_euclid(n as isize) as usize)] += v;
                }
            }
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
            let x = c.solve(&b).unwrap();
            for (u, v) in x.iter().zip(dense_solve(&d, &b)) {
                prop_assert!((u - v).abs() < 1e-11);
            }
            let back = c.mul_vec(&x);
            for (u, v) in back.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-11);
            }
        }
    }
}
