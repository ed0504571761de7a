use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elliptic::{combined_extension, harmonic_moments, ExtensionSet, HarmonicBasis, SolverOptions};
use crate::grid::{face_inner, BoundarySpec, Face, FluidState, Grid};
use crate::solver::{apply_boundary_conditions, heat_flux, induction_rhs, Models};

use super::functionals::{
    ballistic_energy, dissipation_norms, edge_l2, production_from_ghosts, rho_moment, total_energy, total_entropy,
};
use super::DiagnosticsError;

/// One row of the diagnostics time series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    #[serde(rename = "E_kinetic")]
    pub e_kinetic: f64,
    #[serde(rename = "E_internal")]
    pub e_internal: f64,
    #[serde(rename = "E_magnetic")]
    pub e_magnetic: f64,
    /// Ballistic energy; absent when no face carries a temperature.
    #[serde(rename = "F_ballistic")]
    pub f_ballistic: Option<f64>,
    /// Ballistic energy including `−∫ρM`.
    #[serde(rename = "F_shifted")]
    pub f_shifted: Option<f64>,
    /// `∫ θ̃ σ`, the dissipation entering the ballistic balance.
    pub ballistic_dissipation: Option<f64>,
    #[serde(rename = "S_total")]
    pub s_total: f64,
    pub sigma_production: f64,
    #[serde(rename = "D_norms")]
    pub d_norms: [f64; 4],
    pub h_moments: Vec<f64>,
    pub rho_moment_53a: f64,
    /// Outward conductive heat flux through the whole boundary.
    pub boundary_heat_flux: f64,
    pub u_l2: f64,
    /// `‖θ − θ̃‖` against the harmonic temperature extension.
    pub theta_dev_l2: Option<f64>,
    pub curl_b_l2: f64,
    pub theta_floor_hits: usize,
}

const SCALAR_COLUMNS: [&str; 23] = [
    "step",
    "t",
    "mass",
    "E_total",
    "E_kinetic",
    "E_internal",
    "E_magnetic",
    "F_ballistic",
    "F_shifted",
    "ballistic_dissipation",
    "S_total",
    "sigma_production",
    "D_u",
    "D_theta_beta",
    "D_log_theta",
    "D_B",
    "rho_moment_53a",
    "boundary_heat_flux",
    "u_l2",
    "theta_dev_l2",
    "curl_b_l2",
    "theta_floor_hits",
    "n_harmonic",
];

/// CSV header: the scalar columns above followed by `h_0 … h_{k−1}`.
/// Missing optional values are written as empty cells; floats use the shortest
/// representation that round-trips.
pub fn csv_header(harmonic_dim: usize) -> String {
    let mut cols: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend((0..harmonic_dim).map(|i| format!("h_{i}")));
    cols.join(",")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let mut cells = vec![
            self.step.to_string(),
            self.t.to_string(),
            self.mass.to_string(),
            self.e_total.to_string(),
            self.e_kinetic.to_string(),
            self.e_internal.to_string(),
            self.e_magnetic.to_string(),
            opt(self.f_ballistic),
            opt(self.f_shifted),
            opt(self.ballistic_dissipation),
            self.s_total.to_string(),
            self.sigma_production.to_string(),
        ];
        cells.extend(self.d_norms.iter().map(f64::to_string));
        cells.extend([
            self.rho_moment_53a.to_string(),
            self.boundary_heat_flux.to_string(),
            self.u_l2.to_string(),
            opt(self.theta_dev_l2),
            self.curl_b_l2.to_string(),
            self.theta_floor_hits.to_string(),
            self.h_moments.len().to_string(),
        ]);
        cells.extend(self.h_moments.iter().map(f64::to_string));
        cells.join(",")
    }

    fn from_csv_row(line: &str, lineno: usize) -> Result<Self, DiagnosticsError> {
        let cells: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| DiagnosticsError::Csv { line: lineno, detail: what.to_string() };
        if cells.len() < SCALAR_COLUMNS.len() {
            return Err(bad("too few columns"));
        }
        let f = |i: usize| cells[i].parse::<f64>().map_err(|_| bad(SCALAR_COLUMNS[i]));
        let o = |i: usize| if cells[i].is_empty() { Ok(None) } else { f(i).map(Some) };
        let u = |i: usize| cells[i].parse::<usize>().map_err(|_| bad(SCALAR_COLUMNS[i]));
        let k = u(22)?;
        if cells.len() != SCALAR_COLUMNS.len() + k {
            return Err(bad("harmonic column count"));
        }
        let h_moments =
            cells[SCALAR_COLUMNS.len()..].iter().map(|c| c.parse::<f64>().map_err(|_| bad("h"))).collect::<Result<_, _>>()?;
        Ok(DiagnosticsRecord {
            step: u(0)?,
            t: f(1)?,
            mass: f(2)?,
            e_total: f(3)?,
            e_kinetic: f(4)?,
            e_internal: f(5)?,
            e_magnetic: f(6)?,
            f_ballistic: o(7)?,
            f_shifted: o(8)?,
            ballistic_dissipation: o(9)?,
            s_total: f(10)?,
            sigma_production: f(11)?,
            d_norms: [f(12)?, f(13)?, f(14)?, f(15)?],
            rho_moment_53a: f(16)?,
            boundary_heat_flux: f(17)?,
            u_l2: f(18)?,
            theta_dev_l2: o(19)?,
            curl_b_l2: f(20)?,
            theta_floor_hits: u(21)?,
            h_moments,
        })
    }
}

pub fn write_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<(), DiagnosticsError> {
    let mut w = BufWriter::new(File::create(path)?);
    let k = records.first().map_or(0, |r| r.h_moments.len());
    writeln!(w, "{}", csv_header(k))?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>, DiagnosticsError> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if !line.starts_with("step,t,") {
                return Err(DiagnosticsError::Csv { line: 1, detail: "unrecognised header".into() });
            }
            continue;
        }
        if !line.trim().is_empty() {
            out.push(DiagnosticsRecord::from_csv_row(&line, i + 1)?);
        }
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, records: &[DiagnosticsRecord]) -> Result<(), DiagnosticsError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Computes records along a trajectory, caching the boundary-data lifting while
/// the data are time-independent.
pub struct Recorder<'a> {
    grid: &'a Grid,
    spec: &'a BoundarySpec,
    models: &'a Models,
    basis: Option<HarmonicBasis>,
    delta: Option<f64>,
    extension: Option<ExtensionSet>,
    ballistic: bool,
}

impl<'a> Recorder<'a> {
    /// Without a face prescribing the temperature there is no reference
    /// temperature, and the ballistic functional is skipped.
    pub fn new(
        grid: &'a Grid,
        spec: &'a BoundarySpec,
        models: &'a Models,
        basis: Option<HarmonicBasis>,
        delta: Option<f64>,
    ) -> Self {
        Recorder { grid, spec, models, basis, delta, extension: None, ballistic: !spec.thermal_dirichlet_faces().is_empty() }
    }

    pub fn basis(&self) -> Option<&HarmonicBasis> {
        self.basis.as_ref()
    }

    pub fn extension(&self) -> Option<&ExtensionSet> {
        self.extension.as_ref()
    }

    fn refresh_extension(&mut self, t: f64) -> Result<(), DiagnosticsError> {
        let stale = self.extension.is_none()
            || self.spec.magnetic_time_dependent()
            || self.spec.thermal_time_dependent();
        if self.ballistic && stale {
            self.extension =
                Some(combined_extension(self.grid, self.spec, t, self.delta, SolverOptions::default())?);
        }
        Ok(())
    }

    pub fn record(&mut self, state: &FluidState, step: usize) -> Result<DiagnosticsRecord, DiagnosticsError> {
        let grid = self.grid;
        let eos = &self.models.eos;
        self.refresh_extension(state.t)?;
        let energy = total_energy(grid, state, eos);
        let gh = apply_boundary_conditions(grid, state, self.spec, state.t, self.models)?;
        let production = production_from_ghosts(grid, &gh, self.models);
        let norms = dissipation_norms(grid, state, self.models.transport.beta, eos.rho_min());
        let q = heat_flux(grid, &gh, &self.models.transport);
        let current = induction_rhs(grid, &gh, self.spec, &self.models.transport).current;
        let boundary_heat_flux = Face::ALL
            .iter()
            .map(|&f| {
                let a = f.axis();
                let wall = if f.side() == 0 { 0 } else { grid.n()[a] };
                let h = grid.h();
                let (b, c) = Grid::tangential_axes(a);
                let mut s = 0.0;
                for idx in q.c[a].indices().filter(|idx| idx[a] == wall) {
                    s += f.sign() * q.c[a].get(idx[0], idx[1], idx[2]);
                }
                s * h[b] * h[c]
            })
            .sum();
        let (f_ballistic, f_shifted, ballistic_dissipation, theta_dev_l2) = match &self.extension {
            Some(ext) => {
                let f = ballistic_energy(grid, state, ext, &self.spec.env, eos)?;
                let tt = ext.theta_tilde.as_ref().expect("ballistic extension carries a temperature");
                let v = grid.cell_volume();
                let weighted: f64 = production.density.data().iter().zip(tt.data()).map(|(s, t)| s * t).sum::<f64>() * v;
                let dev: f64 =
                    state.theta.data().iter().zip(tt.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * v;
                (Some(f.value), Some(f.shifted), Some(weighted), Some(dev.sqrt()))
            }
            None => (None, None, None, None),
        };
        let h_moments = self.basis.as_ref().map(|b| harmonic_moments(grid, &state.b, b)).unwrap_or_default();
        let record = DiagnosticsRecord {
            step,
            t: state.t,
            mass: state.mass(grid),
            e_total: energy.total,
            e_kinetic: energy.kinetic,
            e_internal: energy.internal,
            e_magnetic: energy.magnetic,
            f_ballistic,
            f_shifted,
            ballistic_dissipation,
            s_total: total_entropy(grid, state, eos),
            sigma_production: production.integral,
            d_norms: norms.as_array(),
            h_moments,
            rho_moment_53a: rho_moment(grid, state),
            boundary_heat_flux,
            u_l2: face_inner(grid, &state.u, &state.u).sqrt(),
            theta_dev_l2,
            curl_b_l2: edge_l2(grid, &current),
            theta_floor_hits: norms.floor_hits,
        };
        record.check_finite()?;
        Ok(record)
    }
}

impl DiagnosticsRecord {
    fn check_finite(&self) -> Result<(), DiagnosticsError> {
        let mut vals = vec![
            ("mass", self.mass),
            ("E_total", self.e_total),
            ("S_total", self.s_total),
            ("sigma_production", self.sigma_production),
            ("rho_moment_53a", self.rho_moment_53a),
            ("boundary_heat_flux", self.boundary_heat_flux),
        ];
        vals.extend(self.f_shifted.map(|v| ("F_shifted", v)));
        vals.extend(self.d_norms.iter().map(|&v| ("D_norms", v)));
        match vals.into_iter().find(|(_, v)| !v.is_finite()) {
            Some((what, _)) => Err(DiagnosticsError::NonFinite { what, t: self.t }),
            None => Ok(()),
        }
    }
}
