//! Explicit time integration of the compressible MHD system on the staggered grid.
//!
//! Density and internal energy live at cell centers, velocity and magnetic field
//! as face normals. Advection uses upwinded MUSCL states (van Albada limiter),
//! diffusion centered differences, the magnetic field is advanced by the curl of
//! edge electromotive fields, and time stepping is two-stage SSP Runge–Kutta with
//! the Coriolis rotation split off symmetrically.

mod ghost;
mod physics;
mod stepper;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;
use crate::thermo::{EosModel, TransportModel};

pub use ghost::{apply_boundary_conditions, GhostState};
pub(crate) use physics::heating;
pub use physics::{heat_flux, induction_rhs, lorentz_force, viscous_stress, Induction, StressField};
pub use stepper::{run, stable_dt, step, RunSummary, StepInfo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    Muscl,
    FirstOrder,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub dt_max: f64,
    /// Include viscous and Joule heating in the internal energy balance.
    pub heating_on: bool,
    /// Emit a record every `output_every` steps (and always at the final time).
    pub output_every: usize,
    pub max_steps: usize,
    pub reconstruction: Reconstruction,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl: 0.5,
            t_end: 1.0,
            dt_max: 0.05,
            heating_on: true,
            output_every: 10,
            max_steps: 100_000,
            reconstruction: Reconstruction::Muscl,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, t_start: f64) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= t_start) {
            return Err(SolverError::Config(format!("t_end {} precedes the start time {t_start}", self.t_end)));
        }
        if !(self.dt_max > 0.0) {
            return Err(SolverError::Config(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if self.output_every == 0 {
            return Err(SolverError::Config("output_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Constitutive models used by the solver.
#[derive(Clone, Debug, Default)]
pub struct Models {
    pub eos: EosModel,
    pub transport: TransportModel,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("radiative boundary temperature did not converge at {face} cell {cell:?}")]
    RadiativeNewton { face: &'static str, cell: [isize; 3] },
    #[error("non-finite {what} at cell {cell:?} (t = {t})")]
    NonFinite { what: &'static str, cell: [usize; 3], t: f64 },
    #[error("negative density {rho:.3e} at cell {cell:?} (t = {t})")]
    NegativeDensity { rho: f64, cell: [usize; 3], t: f64 },
    #[error("temperature not recoverable at cell {cell:?} after first-order retry (t = {t})")]
    Positivity { cell: [usize; 3], t: f64 },
    #[error("step limit {0} reached before t_end")]
    StepLimit(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}
