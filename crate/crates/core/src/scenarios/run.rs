use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{
    csv_header, inequality_monitor, total_energy, write_jsonl, DiagnosticsRecord, MonitorOptions, MonitorReport, Recorder,
};
use crate::elliptic::{harmonic_space, stationarity_test, SolverOptions};
use crate::grid::dump::write_dump;
use crate::grid::{BoundarySpec, FluidState, Grid, Stagger};
use crate::solver::{run, Models, RunSummary, SolverConfig};

use super::config::{hex, Resolved, ScenarioConfig, ScenarioKind};
use super::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64, note: &str) -> Check {
        Check { name: name.into(), value, threshold, passed: value < threshold, note: note.into() }
    }
    fn above(name: &str, value: f64, threshold: f64, note: &str) -> Check {
        Check { name: name.into(), value, threshold, passed: value > threshold, note: note.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub label: String,
    pub steps: usize,
    pub t_final: f64,
    pub first_order_retries: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub csv: PathBuf,
    /// SHA-256 of the CSV file.
    pub records_hash: String,
    pub monitor: MonitorReport,
    #[serde(skip)]
    pub records: Vec<DiagnosticsRecord>,
    #[serde(skip)]
    pub final_state: Option<FluidState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub scenario: ScenarioKind,
    pub config_hash: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub runs: Vec<RunOutcome>,
    /// Scenario-specific measurements that are reported but not thresholded.
    pub measurements: serde_json::Map<String, serde_json::Value>,
}

/// One solver run with diagnostics at the configured cadence. Records go to
/// `<dir>/<label>.csv` (and `.jsonl`); a numerical failure leaves a dump of the
/// last good state at `<dir>/<label>_failure.{json,bin}`.
#[allow(clippy::too_many_arguments)]
pub fn run_recorded(
    grid: &Grid,
    spec: &BoundarySpec,
    models: &Models,
    solver: &SolverConfig,
    monitor: &MonitorOptions,
    harmonic: bool,
    delta: Option<f64>,
    initial: FluidState,
    dir: &Path,
    label: &str,
    jsonl: bool,
) -> Result<RunOutcome, ScenarioError> {
    fs::create_dir_all(dir).map_err(|e| ScenarioError::Io { path: dir.to_path_buf(), source: e })?;
    let basis = if harmonic { Some(harmonic_space(grid, spec)?) } else { None };
    let mut recorder = Recorder::new(grid, spec, models, basis, delta);
    let mut state = initial;
    let mut records = Vec::new();
    let mut diag_error = None;
    let result = run(grid, &mut state, spec, solver, models, &mut |st, info| {
        if diag_error.is_none() {
            match recorder.record(st, info.step) {
                Ok(r) => records.push(r),
                Err(e) => diag_error = Some(e),
            }
        }
    });
    let summary: RunSummary = match result {
        Ok(s) => s,
        Err(e) => {
            let stem = dir.join(format!("{label}_failure"));
            let dumped = write_dump(&stem, grid, &state, Some(e.to_string())).is_ok();
            return Err(ScenarioError::Numerical { label: label.into(), source: e, dump: dumped.then_some(stem) });
        }
    };
    if let Some(e) = diag_error {
        return Err(e.into());
    }
    let csv = dir.join(format!("{label}.csv"));
    let mut text = csv_header(records.first().map_or(0, |r| r.h_moments.len()));
    text.push('\n');
    for r in &records {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    fs::write(&csv, &text).map_err(|e| ScenarioError::Io { path: csv.clone(), source: e })?;
    if jsonl {
        write_jsonl(&dir.join(format!("{label}.jsonl")), &records)?;
    }
    let monitor = inequality_monitor(&records, monitor)?;
    Ok(RunOutcome {
        label: label.into(),
        steps: summary.steps,
        t_final: summary.t_final,
        first_order_retries: summary.first_order_retries,
        initial_energy: records[0].e_total,
        final_energy: records[records.len() - 1].e_total,
        csv,
        records_hash: hex(&Sha256::digest(text.as_bytes())),
        monitor,
        records,
        final_state: Some(state),
    })
}

/// Linear interpolation of the total energy at time `t`.
fn energy_at(records: &[DiagnosticsRecord], t: f64) -> f64 {
    let k = records.partition_point(|r| r.t < t);
    if k == 0 {
        return records[0].e_total;
    }
    if k == records.len() {
        return records[k - 1].e_total;
    }
    let (a, b) = (&records[k - 1], &records[k]);
    a.e_total + (b.e_total - a.e_total) * (t - a.t) / (b.t - a.t)
}

/// Max over interior faces of `|∂p − ρ_f ∂M|`, relative to `max |∂p|`.
pub fn static_balance_residual(grid: &Grid, state: &FluidState, spec: &BoundarySpec, models: &Models) -> f64 {
    let n = grid.n();
    let h = grid.h();
    let p: Vec<f64> =
        state.rho.data().iter().zip(state.theta.data()).map(|(&r, &t)| models.eos.pressure_raw(r, t)).collect();
    let m: Vec<f64> = crate::grid::Array3::zeros(n)
        .indices()
        .map(|i| spec.env.potential(state.t, grid.position(Stagger::Cell, i)))
        .collect();
    let lin = |i: [usize; 3]| i[0] + n[0] * (i[1] + n[1] * i[2]);
    let (mut worst, mut scale) = (0.0_f64, 0.0_f64);
    for idx in crate::grid::Array3::zeros(n).indices() {
        for a in 0..3 {
            if idx[a] == 0 {
                continue;
            }
            let mut lo = idx;
            lo[a] -= 1;
            let (r, l) = (lin(idx), lin(lo));
            let dp = (p[r] - p[l]) / h[a];
            let rho_f = 0.5 * (state.rho.data()[r] + state.rho.data()[l]);
            worst = worst.max((dp - rho_f * (m[r] - m[l]) / h[a]).abs());
            scale = scale.max(dp.abs());
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Uniform temperature shift giving initial energy `ratio · E(initial)`, by bisection.
pub fn energy_scaled_state(grid: &Grid, initial: &FluidState, models: &Models, ratio: f64) -> FluidState {
    let e0 = total_energy(grid, initial, &models.eos).total;
    let target = ratio * e0;
    let shifted = |s: f64| {
        let mut st = initial.clone();
        for v in st.theta.data_mut() {
            *v += s;
        }
        st
    };
    let energy = |s: f64| total_energy(grid, &shifted(s), &models.eos).total;
    let tmin = initial.theta.min();
    let (mut lo, mut hi) = if ratio >= 1.0 { (0.0, 1.0) } else { (-0.999 * tmin, 0.0) };
    while ratio >= 1.0 && energy(hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    shifted(0.5 * (lo + hi))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    let res = cfg.resolve()?;
    run_resolved(cfg, &res)
}

pub fn run_resolved(cfg: &ScenarioConfig, res: &Resolved) -> Result<ScenarioReport, ScenarioError> {
    let Resolved { grid, spec, models, initial } = res;
    let dir = cfg.output_dir.clone();
    let d = &cfg.diagnostics;
    let single = |label: &str, init: FluidState| {
        run_recorded(grid, spec, models, &cfg.solver, &d.monitor, d.harmonic, d.delta, init, &dir, label, d.jsonl)
    };
    let mut checks = Vec::new();
    let mut measurements = serde_json::Map::new();
    let mut measure = |k: &str, v: serde_json::Value| {
        measurements.insert(k.to_string(), v);
    };
    let c = &cfg.checks;
    let runs = match cfg.scenario {
        ScenarioKind::Custom => vec![single("records", initial.clone())?],
        ScenarioKind::Equilibrium => {
            let out = single("records", initial.clone())?;
            let (first, last) = (&out.records[0], &out.records[out.records.len() - 1]);
            let u_ratio = if first.u_l2 > 0.0 { last.u_l2 / first.u_l2 } else { last.u_l2 };
            checks.push(Check::below("velocity_decay", u_ratio, c.velocity_decay, "‖u(t_end)‖ / ‖u(0)‖"));
            match (first.theta_dev_l2, last.theta_dev_l2) {
                (Some(a), Some(b)) => {
                    let red = if b > 0.0 { a / b } else { f64::INFINITY };
                    checks.push(Check::above("theta_reduction", red, c.theta_reduction, "‖θ(0) − θ̃‖ / ‖θ(t_end) − θ̃‖"));
                }
                _ => return Err(ScenarioError::Config {
                    field: "boundary".into(),
                    message: "the equilibrium scenario needs a face with prescribed temperature".into(),
                }),
            }
            let trend = out.monitor.ballistic.clone().expect("ballistic trend exists with a prescribed temperature");
            checks.push(Check {
                name: "ballistic_nonincreasing".into(),
                value: trend.increasing_windows as f64,
                threshold: 0.0,
                passed: trend.increasing_windows == 0,
                note: "windows over which F − ∫ρM increased beyond tolerance".into(),
            });
            measure("curl_b_final", last.curl_b_l2.into());
            measure("curl_b_initial", first.curl_b_l2.into());
            measure("ballistic_balance_defects", trend.balance_defects.into());
            measure("ballistic_max_excess", trend.max_balance_excess.into());
            let fin = out.final_state.as_ref().expect("set by run_recorded");
            measure("static_balance_residual", static_balance_residual(grid, fin, spec, models).into());
            vec![out]
        }
        ScenarioKind::Blowup => {
            let verdict = stationarity_test(grid, spec, 0.0, SolverOptions::default());
            measure("max_tangential_divergence", verdict.max_tangential_divergence.into());
            if verdict.stationary {
                return Err(ScenarioError::Config {
                    field: "boundary".into(),
                    message: format!(
                        "blow-up needs non-stationary magnetic data, but the tangential divergence is {:.3e} (tolerance {:.3e})",
                        verdict.max_tangential_divergence, verdict.divergence_tolerance
                    ),
                });
            }
            if !spec.is_insulated() {
                return Err(ScenarioError::Config {
                    field: "boundary".into(),
                    message: "blow-up needs an insulated boundary".into(),
                });
            }
            let out = single("records", initial.clone())?;
            let t_end = cfg.solver.t_end;
            let ratio = energy_at(&out.records, t_end) / energy_at(&out.records, 0.5 * t_end);
            checks.push(Check::above("energy_growth", ratio, c.growth_factor, "E(t_end) / E(t_end/2); proxy for unbounded energy"));
            checks.push(Check {
                name: "entropy_monotone".into(),
                value: out.monitor.entropy_defects as f64,
                threshold: 0.0,
                passed: out.monitor.entropy_defects == 0,
                note: "records with an entropy decrease beyond tolerance".into(),
            });
            measure(
                "energy_curve",
                out.records.iter().map(|r| serde_json::json!([r.t, r.e_total])).collect::<Vec<_>>().into(),
            );
            vec![out]
        }
        ScenarioKind::Absorbing => {
            let fam = cfg.family.as_ref().expect("validated");
            let starts: Vec<(String, FluidState)> = fam
                .energy_ratios
                .iter()
                .enumerate()
                .map(|(i, &r)| (format!("run_{i}"), energy_scaled_state(grid, initial, models, r)))
                .collect();
            let results: Vec<Result<RunOutcome, ScenarioError>> = if fam.parallel {
                starts.into_par_iter().map(|(l, s)| single(&l, s)).collect()
            } else {
                starts.into_iter().map(|(l, s)| single(&l, s)).collect()
            };
            let mut outs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
            let terminal: Vec<f64> = outs.iter().map(|o| o.final_energy).collect();
            let mean = terminal.iter().sum::<f64>() / terminal.len() as f64;
            let spread = terminal.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - terminal.iter().copied().fold(f64::INFINITY, f64::min);
            let level = c.band_margin * terminal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::below("band_width", spread / mean, c.band_width, "relative spread of terminal energies; proxy for a common absorbing set"));
            // Entry times into the common level, re-evaluated with that level.
            let mut entries = Vec::new();
            for o in outs.iter_mut() {
                let opts = MonitorOptions { energy_level: Some(level), ..d.monitor.clone() };
                o.monitor = inequality_monitor(&o.records, &opts)?;
                entries.push((o.initial_energy, o.monitor.energy_entry_time.unwrap_or(f64::INFINITY)));
            }
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ordered = entries.windows(2).all(|w| w[0].1 <= w[1].1);
            checks.push(Check {
                name: "entry_time_ordered".into(),
                value: f64::from(u8::from(ordered)),
                threshold: 1.0,
                passed: ordered && entries.iter().all(|e| e.1.is_finite()),
                note: "entry time into the common level is non-decreasing in the initial energy".into(),
            });
            measure("band_level", level.into());
            measure("band_mean", mean.into());
            measure("entry_times", entries.iter().map(|e| serde_json::json!([e.0, e.1])).collect::<Vec<_>>().into());
            outs
        }
    };
    let passed = checks.iter().all(|c| c.passed);
    let report = ScenarioReport {
        name: cfg.name.clone(),
        scenario: cfg.scenario,
        config_hash: cfg.hash(),
        passed,
        checks,
        runs,
        measurements,
    };
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(|e| ScenarioError::Io { path, source: e })?;
    Ok(report)
}
