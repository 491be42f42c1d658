//! Multi-indices and exact-exponent polynomials in `N` variables.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// `beta` in `N_0^N`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: impl Into<Vec<u32>>) -> Self {
        MultiIndex(components.into())
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        MultiIndex(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `prod beta_i!` as an exact integer.
    pub fn factorial_u64(&self) -> u64 {
        self.0
            .iter()
            .map(|&b| (1..=b as u64).product::<u64>())
            .product()
    }

    pub fn factorial(&self) -> f64 {
        self.factorial_u64() as f64
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn bump(&self, axis: usize, by: u32) -> MultiIndex {
        let mut c = self.0.clone();
        c[axis] += by;
        MultiIndex(c)
    }

    /// All multi-indices of exactly `order`, first component descending:
    /// `(2,0), (1,1), (0,2)`.
    pub fn of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; dim];
        fill(dim, 0, order, &mut cur, &mut out);
        out
    }

    /// Graded lexicographic enumeration of every index with `|beta| <= max_order`.
    pub fn graded_lex(dim: usize, max_order: u32) -> Vec<MultiIndex> {
        (0..=max_order)
            .flat_map(|k| MultiIndex::of_order(dim, k))
            .collect()
    }
}

fn fill(dim: usize, pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == dim {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill(dim, pos + 1, left - v, cur, out);
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Sparse polynomial `sum c_alpha y^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyRepr", from = "PolyRepr")]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<(MultiIndex, f64)>,
}

impl From<Polynomial> for PolyRepr {
    fn from(p: Polynomial) -> Self {
        PolyRepr {
            dim: p.dim,
            terms: p.terms.into_iter().collect(),
        }
    }
}

impl From<PolyRepr> for Polynomial {
    fn from(r: PolyRepr) -> Self {
        let mut p = Polynomial::zero(r.dim);
        for (a, c) in r.terms {
            p.add_term(a, c);
        }
        p
    }
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial::monomial(MultiIndex::zero(dim), c)
    }

    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        assert_eq!(alpha.dim(), self.dim, "multi-index dimension mismatch");
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(alpha).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    pub fn scale(&self, a: f64) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (k, &c) in &self.terms {
            p.add_term(k.clone(), a * c);
        }
        p
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (k, &c) in &other.terms {
            p.add_term(k.clone(), c);
        }
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    /// `d/dy_axis`, exact in the exponents.
    pub fn partial(&self, axis: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (k, &c) in &self.terms {
            let e = k.components()[axis];
            if e > 0 {
                let mut comp = k.components().to_vec();
                comp[axis] -= 1;
                p.add_term(MultiIndex::new(comp), c * e as f64);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Polynomial {
        (0..self.dim).fold(Polynomial::zero(self.dim), |acc, i| {
            acc.add(&self.partial(i).partial(i))
        })
    }

    pub fn laplacian_pow(&self, k: u32) -> Polynomial {
        (0..k).fold(self.clone(), |p, _| p.laplacian())
    }

    /// `y . grad p`: each monomial is scaled by its degree.
    pub fn euler(&self) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (k, &c) in &self.terms {
            p.add_term(k.clone(), c * k.order() as f64);
        }
        p
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, &c)| {
                c * k
                    .components()
                    .iter()
                    .zip(y)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Largest coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        self.sub(other)
            .terms
            .values()
            .fold(0.0, |m, c| m.max(c.abs()))
    }
}
