//! Per-subcommand options. Each struct is filled from its defaults, then from
//! the matching section of the JSON config file, then from command-line flags.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Overrides shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct GlobalOverrides {
    pub tol: Option<f64>,
    pub grid_half_width: Option<f64>,
    pub grid_cells: Option<usize>,
}

/// Top level of a config file: one optional section per subcommand.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    pub kernel: Option<Value>,
    pub eigen: Option<Value>,
    pub evolve: Option<Value>,
    pub branch: Option<Value>,
    pub profile: Option<Value>,
    pub homotopy: Option<Value>,
    pub verify: Option<Value>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("config {}: {e}", path.display())))
    }

    pub fn section(&self, name: &str) -> Option<&Value> {
        match name {
            "kernel" => self.kernel.as_ref(),
            "eigen" => self.eigen.as_ref(),
            "evolve" => self.evolve.as_ref(),
            "branch" => self.branch.as_ref(),
            "profile" => self.profile.as_ref(),
            "homotopy" => self.homotopy.as_ref(),
            "verify" => self.verify.as_ref(),
            _ => None,
        }
    }
}

/// Defaults, overlaid with the file section if there is one.
pub fn from_section<T: Default + for<'de> Deserialize<'de>>(
    name: &str,
    file: Option<&FileConfig>,
) -> Result<T> {
    match file.and_then(|f| f.section(name)) {
        Some(v) => {
            T::deserialize(v).map_err(|e| Error::config(format!("config section `{name}`: {e}")))
        }
        None => Ok(T::default()),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "{name} = {v} must be positive and finite"
        )))
    }
}

/// `2 L / cells` with an even cell count, so the grid holds the origin
/// (node grids) or is symmetric about it (cell-centred grids).
pub fn spacing(half_width: f64, cells: usize) -> Result<f64> {
    positive("grid half-width", half_width)?;
    if cells < 4 || cells % 2 != 0 {
        return Err(Error::config(format!(
            "grid cells = {cells} must be even and at least 4"
        )));
    }
    Ok(2.0 * half_width / cells as f64)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported {
            what: "dimension",
            value: dim.to_string(),
        })
    }
}

/// `[-L, L]` with `cells` intervals: a node grid in 1D, a cell-centred square in 2D.
pub fn grid_for(dim: usize, half_width: f64, cells: usize) -> Result<GridSpec> {
    let h = spacing(half_width, cells)?;
    match dim {
        1 => GridSpec::line(half_width, h),
        2 => GridSpec::square(half_width, h),
        _ => Err(Error::Unsupported {
            what: "dimension",
            value: dim.to_string(),
        }),
    }
}

macro_rules! apply_grid {
    ($opts:expr, $g:expr) => {
        if let Some(t) = $g.tol {
            $opts.tol = t;
        }
        if let Some(l) = $g.grid_half_width {
            $opts.half_width = Some(l);
        }
        if let Some(c) = $g.grid_cells {
            $opts.cells = Some(c);
        }
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelOpts {
    pub dim: usize,
    pub order: u32,
    pub half_width: Option<f64>,
    pub cells: Option<usize>,
    /// Bound on `|int F - 1|`.
    pub tol: f64,
    /// Bound on `max |B F|` over the grid.
    pub residual_tol: f64,
}

impl Default for KernelOpts {
    fn default() -> Self {
        KernelOpts {
            dim: 1,
            order: 2,
            half_width: None,
            cells: None,
            tol: 1e-8,
            residual_tol: 1e-6,
        }
    }
}

impl KernelOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        apply_grid!(self, g);
        check_dim(self.dim)?;
        let (l, c) = if self.dim == 1 {
            (10.0, 400)
        } else {
            (10.0, 80)
        };
        self.half_width.get_or_insert(l);
        self.cells.get_or_insert(c);
        positive("tol", self.tol)?;
        positive("residual_tol", self.residual_tol)?;
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        grid_for(
            self.dim,
            self.half_width.unwrap_or(10.0),
            self.cells.unwrap_or(400),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOpts {
    pub dim: usize,
    pub order: u32,
    pub max_order: u32,
    pub half_width: Option<f64>,
    pub cells: Option<usize>,
    /// Bound on `max |G - I|` for the Gram matrix.
    pub tol: f64,
}

impl Default for EigenOpts {
    fn default() -> Self {
        EigenOpts {
            dim: 1,
            order: 2,
            max_order: 4,
            half_width: None,
            cells: None,
            tol: 1e-6,
        }
    }
}

impl EigenOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        apply_grid!(self, g);
        check_dim(self.dim)?;
        let (l, c) = if self.dim == 1 {
            (36.0, 720)
        } else {
            (32.0, 256)
        };
        self.half_width.get_or_insert(l);
        self.cells.get_or_insert(c);
        positive("tol", self.tol)?;
        if self.max_order > 8 {
            return Err(Error::config(format!(
                "max_order = {} exceeds 8",
                self.max_order
            )));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        grid_for(
            self.dim,
            self.half_width.unwrap_or(36.0),
            self.cells.unwrap_or(720),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOpts {
    pub order: u32,
    pub taus: Vec<f64>,
    /// Truncation level `k` of the eigen-expansion.
    pub truncation: u32,
    pub half_width: Option<f64>,
    pub cells: Option<usize>,
    /// Bound on the L2 gap between expansion and convolution.
    pub tol: f64,
    /// Bound on the relative mass change under the convolution.
    pub mass_tol: f64,
}

impl Default for EvolveOpts {
    fn default() -> Self {
        EvolveOpts {
            order: 2,
            taus: vec![1.0, 2.0, 4.0],
            truncation: 8,
            half_width: None,
            cells: None,
            tol: 1e-4,
            mass_tol: 1e-6,
        }
    }
}

impl EvolveOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        apply_grid!(self, g);
        self.half_width.get_or_insert(30.0);
        self.cells.get_or_insert(1200);
        positive("tol", self.tol)?;
        positive("mass_tol", self.mass_tol)?;
        if self.taus.is_empty() {
            return Err(Error::config("need at least one tau"));
        }
        for &t in &self.taus {
            positive("tau", t)?;
        }
        if self.truncation > 12 {
            return Err(Error::config(format!(
                "truncation = {} exceeds 12",
                self.truncation
            )));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        grid_for(
            1,
            self.half_width.unwrap_or(30.0),
            self.cells.unwrap_or(1200),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchOpts {
    pub level: u32,
    pub dim: usize,
    pub half_width: Option<f64>,
    pub cells: Option<usize>,
    /// Level 0: bound on the relative gap to `-N^2/16` (default 0.02).
    /// Levels 1 and 2: bound on the residual at every reported root (1e-4,
    /// the floor that quadrature noise in the log terms leaves on continuum points).
    pub tol: Option<f64>,
    pub exclusion_radius: f64,
    pub extrapolation_levels: usize,
    pub lattice: Option<usize>,
    pub newton_tol: f64,
    pub continuum_tol: f64,
}

impl Default for BranchOpts {
    fn default() -> Self {
        BranchOpts {
            level: 0,
            dim: 1,
            half_width: None,
            cells: None,
            tol: None,
            exclusion_radius: 0.01,
            extrapolation_levels: 3,
            lattice: None,
            newton_tol: 1e-10,
            continuum_tol: 1e-4,
        }
    }
}

impl BranchOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        if let Some(t) = g.tol {
            self.tol = Some(t);
        }
        if let Some(l) = g.grid_half_width {
            self.half_width = Some(l);
        }
        if let Some(c) = g.grid_cells {
            self.cells = Some(c);
        }
        check_dim(self.dim)?;
        if self.level > 2 {
            return Err(Error::Unsupported {
                what: "branching level",
                value: self.level.to_string(),
            });
        }
        if self.level > 0 && self.dim != 2 {
            return Err(Error::config(format!("level {} needs --dim 2", self.level)));
        }
        let (l, c) = if self.dim == 1 {
            (40.0, 8000)
        } else {
            (32.0, 256)
        };
        self.half_width.get_or_insert(l);
        self.cells.get_or_insert(c);
        if self.level > 0 {
            self.lattice
                .get_or_insert(if self.level == 1 { 20 } else { 6 });
        }
        positive(
            "tol",
            *self
                .tol
                .get_or_insert(if self.level == 0 { 0.02 } else { 1e-4 }),
        )?;
        positive("exclusion_radius", self.exclusion_radius)?;
        positive("newton_tol", self.newton_tol)?;
        positive("continuum_tol", self.continuum_tol)?;
        if self.extrapolation_levels < 2 {
            return Err(Error::config("extrapolation_levels must be at least 2"));
        }
        if self.lattice.is_some_and(|n| n < 2) {
            return Err(Error::config("lattice must be at least 2"));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        grid_for(
            self.dim,
            self.half_width.unwrap_or(40.0),
            self.cells.unwrap_or(8000),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileOpts {
    pub ns: Vec<f64>,
    pub half_width: Option<f64>,
    pub cells: Option<usize>,
    /// Fixed-point tolerance.
    pub tol: f64,
    pub theta: f64,
    pub eta: f64,
    pub max_sweeps: usize,
    /// Bound on `increment / (dn ||F||)` along the branch.
    pub increment_ratio_max: f64,
}

impl Default for ProfileOpts {
    fn default() -> Self {
        ProfileOpts {
            ns: vec![0.01, 0.02, 0.04, 0.08],
            half_width: None,
            cells: None,
            tol: 1e-9,
            theta: 0.5,
            eta: 1e-8,
            max_sweeps: 500,
            increment_ratio_max: 5.0,
        }
    }
}

impl ProfileOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        apply_grid!(self, g);
        self.half_width.get_or_insert(40.0);
        self.cells.get_or_insert(1600);
        if self.ns.is_empty() {
            return Err(Error::config("need at least one n"));
        }
        positive("increment_ratio_max", self.increment_ratio_max)?;
        spacing(self.half_width.unwrap_or(40.0), self.cells.unwrap_or(1600))?;
        self.profile_config()?.validate()
    }

    pub fn profile_config(&self) -> Result<crate::profile::ProfileConfig> {
        let l = self.half_width.unwrap_or(40.0);
        Ok(crate::profile::ProfileConfig {
            half_width: l,
            spacing: spacing(l, self.cells.unwrap_or(1600))?,
            theta: self.theta,
            eta: self.eta,
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            delta0: None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `n = 1/sqrt|ln eps|`
    SqrtLog,
    /// `n = 1/ln^2 eps`
    LogSquared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomotopyOpts {
    pub eps: f64,
    pub n: f64,
    pub half_width: Option<f64>,
    pub cells: Option<usize>,
    pub t_final: f64,
    pub dt_initial: f64,
    pub dt_max: f64,
    pub ladder: usize,
    /// Bound on the relative energy-balance defect.
    pub tol: f64,
    pub mass_tol: f64,
    pub limit: Option<Schedule>,
    pub limit_eps: Vec<f64>,
    pub t_eval: f64,
}

impl Default for HomotopyOpts {
    fn default() -> Self {
        HomotopyOpts {
            eps: 0.05,
            n: 0.2,
            half_width: None,
            cells: None,
            t_final: 1.0,
            dt_initial: 1e-6,
            dt_max: 1e-3,
            ladder: 20,
            tol: 0.02,
            mass_tol: 1e-10,
            limit: None,
            limit_eps: vec![1e-1, 1e-2, 1e-3],
            t_eval: 0.5,
        }
    }
}

impl HomotopyOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        apply_grid!(self, g);
        self.half_width.get_or_insert(10.0);
        self.cells.get_or_insert(512);
        positive("tol", self.tol)?;
        positive("mass_tol", self.mass_tol)?;
        positive("t_eval", self.t_eval)?;
        if self.limit.is_some() {
            if self.limit_eps.len() < 2 {
                return Err(Error::config("limit study needs at least two eps values"));
            }
            if self.limit_eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                return Err(Error::config("limit eps values must lie in (0, 1)"));
            }
        }
        self.pde_config()?.validate()
    }

    pub fn pde_config(&self) -> Result<crate::homotopy::PdeConfig> {
        let cells = self.cells.unwrap_or(512);
        spacing(self.half_width.unwrap_or(10.0), cells)?;
        Ok(crate::homotopy::PdeConfig {
            eps: self.eps,
            n: self.n,
            domain_half_width: self.half_width.unwrap_or(10.0),
            cells,
            dt_initial: self.dt_initial,
            t_final: self.t_final,
            dt_max: self.dt_max,
            ladder: self.ladder,
            ..crate::homotopy::PdeConfig::default()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOpts {
    pub quick: bool,
    /// Scales every acceptance bound; `1` is the reference suite.
    pub tol: f64,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts {
            quick: false,
            tol: 1.0,
        }
    }
}

impl VerifyOpts {
    pub fn finish(&mut self, g: &GlobalOverrides) -> Result<()> {
        if let Some(t) = g.tol {
            self.tol = t;
        }
        if g.grid_half_width.is_some() || g.grid_cells.is_some() {
            return Err(Error::config(
                "verify runs on fixed reference grids; --grid-L and --grid-cells do not apply",
            ));
        }
        positive("tol", self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_section_then_flags() {
        let file: FileConfig =
            serde_json::from_str(r#"{ "kernel": { "order": 1, "tol": 1e-9 } }"#).unwrap();
        let mut k: KernelOpts = from_section("kernel", Some(&file)).unwrap();
        assert_eq!((k.order, k.tol), (1, 1e-9));
        k.finish(&GlobalOverrides {
            tol: Some(1e-7),
            grid_half_width: Some(8.0),
            grid_cells: None,
        })
        .unwrap();
        assert_eq!((k.tol, k.half_width, k.cells), (1e-7, Some(8.0), Some(400)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{ "kernal": {} }"#).is_err());
        let file: FileConfig = serde_json::from_str(r#"{ "kernel": { "ordr": 1 } }"#).unwrap();
        assert!(from_section::<KernelOpts>("kernel", Some(&file)).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(spacing(10.0, 7).is_err());
        assert!(spacing(-1.0, 8).is_err());
        assert_eq!(spacing(10.0, 400).unwrap(), 0.05);
        let mut b = BranchOpts {
            level: 1,
            ..BranchOpts::default()
        };
        assert!(b.finish(&GlobalOverrides::default()).is_err());
    }
}
