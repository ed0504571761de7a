//! Functionals of the dissipativity analysis evaluated on discrete states:
//! energy, ballistic energy, entropy and its production, the coercivity norms,
//! harmonic moments, and a monitor for the inequalities along a time series.

mod functionals;
mod monitor;
mod record;

use thiserror::Error;

use crate::elliptic::EllipticError;
use crate::solver::SolverError;

pub use crate::elliptic::harmonic_moments;
pub use functionals::{
    ballistic_energy, dissipation_norms, edge_l2, entropy_production, rho_moment, total_energy, total_entropy,
    BallisticEnergy, DissipationNorms, EnergyComponents, EntropyProduction, RHO_MOMENT_EXPONENT,
};
pub use monitor::{inequality_monitor, BallisticTrend, MonitorOptions, MonitorReport};
pub use record::{csv_header, read_csv, write_csv, write_jsonl, DiagnosticsRecord, Recorder};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("the ballistic energy needs a reference temperature, but no face prescribes one")]
    NoReferenceTemperature,
    #[error("reference temperature {value} is not positive at cell {cell:?}")]
    NonPositiveReferenceTemperature { value: f64, cell: [usize; 3] },
    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },
    #[error("the monitor needs at least two records, got {0}")]
    TooFewRecords(usize),
    #[error("CSV line {line}: {detail}")]
    Csv { line: usize, detail: String },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
