//! Elliptic building blocks: mixed Poisson problems, the Bogovskii operator,
//! lifting of boundary data, stationarity of magnetic data and harmonic fields.

mod bogovskii;
mod extension;
mod harmonic;
mod krylov;
mod poisson;
pub(crate) mod sparse;
mod stationarity;

use thiserror::Error;

use crate::grid::GridError;

pub use bogovskii::{bogovskii, h1_norm, BogovskiiResult, CellMask};
pub use extension::{
    collar_mask, combined_extension, cutoff, default_delta0, normal_extension, tangential_extension, ExtensionSet,
};
pub use harmonic::{harmonic_moments, harmonic_space, poincare_constant, project_off_harmonic, HarmonicBasis, HarmonicSummary};
pub use krylov::{minres, pcg, SolveStats, SolverOptions};
pub use poisson::{harmonic_extension_temperature, poisson_mixed, FaceCondition};
pub use stationarity::{stationarity_test, tangential_divergence, FaceDivergence, StationarityVerdict};

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize, history: Vec<f64> },
    #[error("pure-Neumann data incompatible: defect {defect:.3e}")]
    Incompatible { defect: f64 },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("no face carries a prescribed temperature")]
    NoDirichletTemperature,
    #[error("mask has {components} connected components, expected one")]
    DisconnectedMask { components: usize },
    #[error("right-hand side has nonzero mean {mean:.3e} on the mask")]
    NonzeroMean { mean: f64 },
    #[error("cutoff width {delta} outside (0, {delta0}]")]
    DeltaOutOfRange { delta: f64, delta0: f64 },
    #[error("no clear spectral gap; smallest singular values {tail:?}")]
    AmbiguousSpectrum { tail: Vec<f64> },
    #[error(transparent)]
    Grid(#[from] GridError),
}
