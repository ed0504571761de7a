use super::{volume_integral, CellField, FaceField, Grid};

/// Discrete fields at one time instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub t: f64,
    pub rho: CellField,
    pub theta: CellField,
    /// Velocity, normal components on faces.
    pub u: FaceField,
    /// Magnetic field, normal components on faces.
    pub b: FaceField,
}

impl FluidState {
    /// Uniform rest state with zero magnetic field.
    pub fn rest(grid: &Grid, rho: f64, theta: f64) -> Self {
        FluidState {
            t: 0.0,
            rho: CellField::constant(grid, rho),
            theta: CellField::constant(grid, theta),
            u: FaceField::zeros(grid),
            b: FaceField::zeros(grid),
        }
    }

    pub fn mass(&self, grid: &Grid) -> f64 {
        volume_integral(grid, &self.rho)
    }
}
