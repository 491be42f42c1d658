//! Uniform grids and sampled scalar fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::DerivativeCombo;

/// One uniform coordinate axis with nodes `(first + i) * spacing`, `i < len`.
///
/// Positions are kept in units of the spacing so that symmetric grids are
/// symmetric to the last bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub first: f64,
    pub spacing: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, spacing: f64, len: usize) -> Result<Self> {
        if !(spacing > 0.0) || !start.is_finite() || !spacing.is_finite() {
            return Err(Error::config(format!(
                "bad axis start={start} spacing={spacing}"
            )));
        }
        if len < 2 {
            return Err(Error::config("axis needs at least two points"));
        }
        Ok(Axis {
            first: start / spacing,
            spacing,
            len,
        })
    }

    fn from_units(first: f64, spacing: f64, len: usize) -> Self {
        Axis {
            first,
            spacing,
            len,
        }
    }

    pub fn start(&self) -> f64 {
        self.first * self.spacing
    }

    /// Node-centred axis on `[-L, L]` that contains the origin.
    pub fn symmetric(half_width: f64, spacing: f64) -> Result<Self> {
        let cells = cells_for(half_width, spacing)?;
        Ok(Axis::from_units(-(cells as f64), spacing, 2 * cells + 1))
    }

    /// Cell-centred axis on `[-L, L]`: points at `±h/2, ±3h/2, ...`, origin excluded.
    pub fn cell_centered(half_width: f64, spacing: f64) -> Result<Self> {
        let cells = cells_for(half_width, spacing)?;
        Ok(Axis::from_units(0.5 - cells as f64, spacing, 2 * cells))
    }

    /// Radial axis `0, h, ..., R`.
    pub fn radial(extent: f64, spacing: f64) -> Result<Self> {
        let cells = cells_for(extent, spacing)?;
        Ok(Axis::from_units(0.0, spacing, cells + 1))
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        (self.first + i as f64) * self.spacing
    }

    pub fn end(&self) -> f64 {
        self.node(self.len - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.node(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        self.start().abs().max(self.end().abs())
    }

    /// Every `stride`-th node starting from the first.
    pub fn subsample(&self, stride: usize) -> Axis {
        Axis {
            first: self.first / stride as f64,
            spacing: self.spacing * stride as f64,
            len: (self.len - 1) / stride + 1,
        }
    }
}

fn cells_for(half_width: f64, spacing: f64) -> Result<usize> {
    if !(half_width > 0.0) || !(spacing > 0.0) {
        return Err(Error::config(format!(
            "half-width {half_width} and spacing {spacing} must be positive"
        )));
    }
    let cells = half_width / spacing;
    let rounded = cells.round();
    if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 1.0 {
        return Err(Error::config(format!(
            "half-width {half_width} is not a whole number of cells of size {spacing}"
        )));
    }
    Ok(rounded as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform1d,
    Radial,
    Tensor2d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridSpec {
    Uniform1d(Axis),
    /// Radial profile of a function on the plane.
    Radial(Axis),
    /// Row-major: index `j * x.len + i` holds `(x_i, y_j)`.
    Tensor2d {
        x: Axis,
        y: Axis,
    },
}

impl GridSpec {
    pub fn line(half_width: f64, spacing: f64) -> Result<Self> {
        Ok(GridSpec::Uniform1d(Axis::symmetric(half_width, spacing)?))
    }

    pub fn square(half_width: f64, spacing: f64) -> Result<Self> {
        let a = Axis::cell_centered(half_width, spacing)?;
        Ok(GridSpec::Tensor2d { x: a.clone(), y: a })
    }

    pub fn kind(&self) -> GridKind {
        match self {
            GridSpec::Uniform1d(_) => GridKind::Uniform1d,
            GridSpec::Radial(_) => GridKind::Radial,
            GridSpec::Tensor2d { .. } => GridKind::Tensor2d,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Uniform1d(_) => 1,
            _ => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GridSpec::Uniform1d(a) | GridSpec::Radial(a) => a.len,
            GridSpec::Tensor2d { x, y } => x.len * y.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        match self {
            GridSpec::Uniform1d(a) | GridSpec::Radial(a) => a.spacing,
            GridSpec::Tensor2d { x, .. } => x.spacing,
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            GridSpec::Uniform1d(a) | GridSpec::Radial(a) => a.half_width(),
            GridSpec::Tensor2d { x, y } => x.half_width().max(y.half_width()),
        }
    }

    /// Cartesian coordinates of point `i`; a radial point `r` maps to `(r, 0)`.
    #[inline]
    pub fn point(&self, i: usize) -> [f64; 2] {
        match self {
            GridSpec::Uniform1d(a) => [a.node(i), 0.0],
            GridSpec::Radial(a) => [a.node(i), 0.0],
            GridSpec::Tensor2d { x, y } => [x.node(i % x.len), y.node(i / x.len)],
        }
    }

    /// Largest Euclidean distance from the origin over the grid.
    pub fn max_radius(&self) -> f64 {
        match self {
            GridSpec::Uniform1d(a) | GridSpec::Radial(a) => a.half_width(),
            GridSpec::Tensor2d { x, y } => x.half_width().hypot(y.half_width()),
        }
    }

    /// Keeps every `stride`-th point along each axis.
    pub fn subsample(&self, stride: usize) -> GridSpec {
        match self {
            GridSpec::Uniform1d(a) => GridSpec::Uniform1d(a.subsample(stride)),
            GridSpec::Radial(a) => GridSpec::Radial(a.subsample(stride)),
            GridSpec::Tensor2d { x, y } => GridSpec::Tensor2d {
                x: x.subsample(stride),
                y: y.subsample(stride),
            },
        }
    }
}

/// Values of a scalar function on a grid.
///
/// `origin` records the kernel-derivative combination a field was sampled
/// from, which lets operators such as `B` act on the Fourier side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<DerivativeCombo>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(SampledField {
            grid,
            values,
            origin: None,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        SampledField::new(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        SampledField {
            grid,
            values: vec![0.0; n],
            origin: None,
        }
    }

    pub fn with_origin(mut self, origin: DerivativeCombo) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn kind(&self) -> GridKind {
        self.grid.kind()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn half_width(&self) -> f64 {
        self.grid.half_width()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Integral over the domain. Uniform grids use the trapezoid rule, which is
    /// spectrally accurate for data decaying at the edges; radial grids use
    /// Simpson's rule on `2 pi r f(r)`.
    pub fn integrate(&self) -> f64 {
        integrate_values(&self.grid, &self.values)
    }

    /// `int self * other`.
    pub fn dot(&self, other: &SampledField) -> Result<f64> {
        self.check_same_grid(other)?;
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(integrate_values(&self.grid, &prod))
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        integrate_values(&self.grid, &sq).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_distance(&self, other: &SampledField) -> Result<f64> {
        Ok(self.zip_map(other, |a, b| a - b)?.l2_norm())
    }

    pub fn linf_distance(&self, other: &SampledField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Pointwise map; the kernel metadata is dropped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            origin: None,
        }
    }

    pub fn zip_map(
        &self,
        other: &SampledField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<SampledField> {
        self.check_same_grid(other)?;
        Ok(SampledField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            origin: None,
        })
    }

    /// `a * self`, keeping kernel metadata consistent.
    pub fn scaled(&self, a: f64) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            origin: self.origin.as_ref().map(|c| c.scaled(a)),
        }
    }

    /// `self + a * other`, keeping kernel metadata when both sides carry it.
    pub fn add_scaled(&self, a: f64, other: &SampledField) -> Result<SampledField> {
        let mut out = self.zip_map(other, |x, y| x + a * y)?;
        if let (Some(p), Some(q)) = (&self.origin, &other.origin) {
            out.origin = Some(p.add_scaled(a, q));
        }
        Ok(out)
    }

    pub fn subsample(&self, stride: usize) -> SampledField {
        let grid = self.grid.subsample(stride);
        let values = match &self.grid {
            GridSpec::Uniform1d(_) | GridSpec::Radial(_) => {
                self.values.iter().step_by(stride).copied().collect()
            }
            GridSpec::Tensor2d { x, .. } => {
                let mut v = Vec::with_capacity(grid.len());
                if let GridSpec::Tensor2d { x: sx, y: sy } = &grid {
                    for j in 0..sy.len {
                        for i in 0..sx.len {
                            v.push(self.values[j * stride * x.len + i * stride]);
                        }
                    }
                }
                v
            }
        };
        SampledField {
            grid,
            values,
            origin: self.origin.clone(),
        }
    }

    /// Index of the grid point closest to the origin.
    pub fn center_index(&self) -> usize {
        (0..self.grid.len())
            .min_by(|&a, &b| {
                let pa = self.grid.point(a);
                let pb = self.grid.point(b);
                (pa[0].hypot(pa[1])).total_cmp(&pb[0].hypot(pb[1]))
            })
            .unwrap_or(0)
    }
}

pub(crate) fn integrate_values(grid: &GridSpec, values: &[f64]) -> f64 {
    match grid {
        GridSpec::Uniform1d(a) => trapezoid(values, a.spacing),
        GridSpec::Radial(a) => {
            let w: Vec<f64> = values
                .iter()
                .enumerate()
                .map(|(i, v)| 2.0 * std::f64::consts::PI * a.node(i) * v)
                .collect();
            simpson(&w, a.spacing)
        }
        GridSpec::Tensor2d { x, y } => {
            let rows: Vec<f64> = values
                .chunks(x.len)
                .map(|row| trapezoid(row, x.spacing))
                .collect();
            trapezoid(&rows, y.spacing)
        }
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Composite Simpson; an even point count gets a trapezoid on the last cell.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 3 {
        return trapezoid(values, h);
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let mut s = values[0] + values[m - 1];
    for (i, v) in values[1..m - 1].iter().enumerate() {
        s += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if m < n {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_axis_contains_origin() {
        let a = Axis::symmetric(3.0, 0.5).unwrap();
        assert_eq!(a.len, 13);
        assert_eq!(a.node(6), 0.0);
        assert!(Axis::symmetric(3.0, 0.7).is_err());
    }

    #[test]
    fn cell_centered_skips_origin() {
        let a = Axis::cell_centered(1.0, 0.25).unwrap();
        assert_eq!(a.len, 8);
        assert!((a.node(3) + 0.125).abs() < 1e-15);
        assert!((a.node(4) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn gaussian_integrals() {
        let g = GridSpec::line(12.0, 0.1).unwrap();
        let f = SampledField::from_fn(g, |p| (-p[0] * p[0]).exp()).unwrap();
        assert!((f.integrate() - std::f64::consts::PI.sqrt()).abs() < 1e-13);

        let sq = GridSpec::square(8.0, 0.1).unwrap();
        let f2 = SampledField::from_fn(sq, |p| (-p[0] * p[0] - p[1] * p[1]).exp()).unwrap();
        assert!((f2.integrate() - std::f64::consts::PI).abs() < 1e-12);

        let rad = GridSpec::Radial(Axis::radial(8.0, 1e-3).unwrap());
        let f3 = SampledField::from_fn(rad, |p| (-p[0] * p[0]).exp()).unwrap();
        assert!((f3.integrate() - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn rejects_nan_and_bad_length() {
        let g = GridSpec::line(1.0, 0.5).unwrap();
        assert!(matches!(
            SampledField::new(g.clone(), vec![0.0; 4]),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            SampledField::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(2))
        ));
    }

    #[test]
    fn subsample_tensor() {
        let sq = GridSpec::square(1.0, 0.25).unwrap();
        let f = SampledField::from_fn(sq, |p| p[0] + 10.0 * p[1]).unwrap();
        let s = f.subsample(2);
        for i in 0..s.len() {
            let p = s.grid.point(i);
            assert!((s.values[i] - (p[0] + 10.0 * p[1])).abs() < 1e-14);
        }
    }
}
