//! Numerical laboratory for the thin-film equation
//! `h_t = -(h^n h_xxx)_x - B (h^m h_x)_x` on a periodic interval.

pub mod analysis;
pub mod banded;
pub mod error;
pub mod evolution;
pub mod fdsteady;
pub mod grid;
mod ode;
pub mod params;
pub mod perturb;
pub mod spectral;
pub mod steady;

pub use error::{Error, Result};
pub use grid::{make_grid, PeriodicField};
pub use params::ModelParams;
