//! Composite Gauss-Legendre rules.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PANEL_DEGREE: usize = 16;

/// Node/weight table on `[0, cutoff]`.
///
/// The radial integrand `s J_0(sr) e^{-s^4}` is smooth but only even in `s`,
/// so a panelled Gauss rule converges spectrally where the trapezoid rule
/// would stall at second order at `s = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRule {
    pub cutoff: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FrequencyRule {
    /// At least `node_count` nodes, rounded up to whole 16-point panels.
    pub fn new(cutoff: f64, node_count: usize) -> Result<Self> {
        if !(cutoff > 0.0) || node_count == 0 {
            return Err(Error::config(
                "frequency rule needs a positive cutoff and nodes",
            ));
        }
        let panels = node_count.div_ceil(PANEL_DEGREE);
        let (nodes, weights) = composite(0.0, cutoff, panels, PANEL_DEGREE);
        Ok(FrequencyRule {
            cutoff,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights of `panels` equal Gauss-Legendre panels on `[a, b]`.
pub fn composite(a: f64, b: f64, panels: usize, degree: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(degree).expect("degree >= 1"));
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * degree);
    let mut weights = Vec::with_capacity(panels * degree);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (x, w) in pairs {
            nodes.push(mid + 0.5 * width * x);
            weights.push(0.5 * width * w);
        }
    }
    (nodes, weights)
}
