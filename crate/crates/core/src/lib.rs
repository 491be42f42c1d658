//! Numerics for the fourth-order thin film equation `u_t = -div(|u|^n grad Lap u)`.
//!
//! The crate covers the rescaled bi-harmonic kernel and its derivatives,
//! the Hermite-type spectral pair of the rescaled operator, the linear
//! semigroup, Lyapunov-Schmidt branching systems for small `n`,
//! self-similar profiles and an epsilon-regularized PDE solver.
//!
//! Most entry points take a [`kernel::KernelModel`] built once and shared.

pub mod banded;
pub mod bessel;
pub mod branching;
pub mod cli;
pub mod error;
pub mod grid;
pub mod homotopy;
pub mod kernel;
pub mod par;
pub mod poly;
pub mod profile;
pub mod quadrature;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Axis, GridSpec, SampledField};
pub use kernel::KernelModel;
pub use poly::{MultiIndex, Polynomial};
