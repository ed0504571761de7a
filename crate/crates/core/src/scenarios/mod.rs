//! Configured runs: JSON configurations, the three canned scenarios with their
//! checks, the static-shell calculation, and plotting of record files.

mod config;
mod expr;
mod plot;
mod run;
mod static_shell;

use std::path::PathBuf;

use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::elliptic::EllipticError;
use crate::grid::GridError;
use crate::solver::SolverError;

pub use config::{
    BoundaryBlock, ChecksBlock, DiagnosticsBlock, FaceBlock, FacePatch, FamilyBlock, GridBlock, InitialBlock,
    InitialField, MagneticTag, ModelsBlock, Resolved, ScenarioConfig, ScenarioKind, ThermalTag, VelocityTag,
};
pub use expr::{Expr, ParseError};
pub use plot::{plot_records, PlotFormat, DEFAULT_COLUMNS};
pub use run::{
    energy_scaled_state, run_recorded, run_resolved, run_scenario, static_balance_residual, Check, RunOutcome,
    ScenarioReport,
};
pub use static_shell::{static_shell, ShellParams, ShellProfile, StaticShell};

pub const CANNED: [&str; 3] = ["equilibrium", "blowup", "absorbing"];

impl ScenarioConfig {
    /// The built-in configuration of that name; the same files ship in `configs/`.
    pub fn canned(name: &str) -> Option<ScenarioConfig> {
        let text = match name {
            "equilibrium" => include_str!("../../../../configs/equilibrium.json"),
            "blowup" => include_str!("../../../../configs/blowup.json"),
            "absorbing" => include_str!("../../../../configs/absorbing.json"),
            _ => return None,
        };
        Some(ScenarioConfig::from_json(text).expect("canned configurations parse"))
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("numerical failure in run `{label}`: {source}{}", dump.as_ref().map(|d| format!(" (state dumped to {})", d.display())).unwrap_or_default())]
    Numerical {
        label: String,
        source: SolverError,
        dump: Option<PathBuf>,
    },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { what: String, iterations: usize, residual: f64 },
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("plotting failed: {0}")]
    Plot(String),
}

impl ScenarioError {
    /// Process exit status: 2 for configuration problems, 3 for numerical failures,
    /// 4 for everything else (I/O, plotting).
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Schema { .. } | ScenarioError::Config { .. } | ScenarioError::Grid(_) => 2,
            ScenarioError::Elliptic(
                EllipticError::DeltaOutOfRange { .. } | EllipticError::NoDirichletTemperature | EllipticError::BadInput(_),
            ) => 2,
            ScenarioError::Numerical { .. } | ScenarioError::NoConvergence { .. } | ScenarioError::Elliptic(_) => 3,
            ScenarioError::Diagnostics(e) => match e {
                DiagnosticsError::NonFinite { .. } | DiagnosticsError::Solver(_) | DiagnosticsError::Elliptic(_) => 3,
                DiagnosticsError::NoReferenceTemperature | DiagnosticsError::NonPositiveReferenceTemperature { .. } => 2,
                _ => 4,
            },
            ScenarioError::Io { .. } | ScenarioError::Json(_) | ScenarioError::Plot(_) => 4,
        }
    }
}
