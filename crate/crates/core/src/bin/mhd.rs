use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use mhd_core::elliptic::{combined_extension, harmonic_space, stationarity_test, SolverOptions};
use mhd_core::grid::dump::write_dump;
use mhd_core::grid::{face_inner, FluidState};
use mhd_core::scenarios::{plot_records, run_resolved, static_shell, ScenarioConfig, ScenarioError, ShellParams};
use mhd_core::thermo::{default_lattices, gibbs_samples, hypothesis_report};

/// Compressible MHD scenarios and diagnostics.
#[derive(Parser)]
#[command(name = "mhd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; writes records, a JSON report and (on failure) a state dump.
    Run {
        /// Path to a JSON configuration, or the name of a built-in scenario.
        config: String,
        /// Validate and resolve the configuration without time stepping.
        #[arg(long)]
        dry_run: bool,
        /// Override the configured output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check the constitutive hypotheses of the configured models.
    CheckEos {
        config: String,
        /// Finite-difference step for the Gibbs residuals.
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
    },
    /// Decide whether the magnetic boundary data admit a curl- and divergence-free extension.
    Stationarity { config: String },
    /// Dimension and spectrum tail of the harmonic field space.
    HarmonicDim { config: String },
    /// Lift the magnetic boundary data with cutoff width `delta`.
    ExtendB {
        config: String,
        #[arg(long)]
        delta: f64,
        /// Also write the lifted field as a grid dump with this stem.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Plot record columns against time; `.svg` output is labelled, `.png` is not.
    Plot {
        csv: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma-separated column names (default: E_total,S_total,F_shifted).
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
    },
    /// Radial conduction between concentric spheres and the static-state obstruction.
    StaticShell {
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
        #[arg(long, default_value_t = 2.0)]
        r2: f64,
        #[arg(long, default_value_t = 2.0)]
        theta_int: f64,
        #[arg(long, default_value_t = 1.0)]
        theta_ext: f64,
        /// Angular velocity as `wx,wy,wz`, or a single number for `(0, 0, w)`.
        #[arg(long, value_delimiter = ',', default_value = "0,0,1")]
        omega: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        gbar: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa0: f64,
        /// Conductivity exponent: `κ = κ0 (1 + θ^β)`; omit for constant `κ0`.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 201)]
        nodes: usize,
        /// Include the radial profile in the output.
        #[arg(long)]
        profile: bool,
    },
}

fn load(config: &str) -> Result<ScenarioConfig, ScenarioError> {
    if !Path::new(config).exists() {
        if let Some(c) = ScenarioConfig::canned(config) {
            return Ok(c);
        }
    }
    ScenarioConfig::load(Path::new(config))
}

fn print(v: &serde_json::Value) {
    use std::io::Write;
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn execute(cli: Cli) -> Result<ExitCode, ScenarioError> {
    match cli.command {
        Command::Run { config, dry_run, output_dir } => {
            let mut cfg = load(&config)?;
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let res = cfg.resolve()?;
            if dry_run {
                print(&json!({
                    "name": cfg.name,
                    "config_hash": cfg.hash(),
                    "cells": res.grid.n(),
                    "mass": res.initial.mass(&res.grid),
                    "valid": true,
                }));
                return Ok(ExitCode::SUCCESS);
            }
            let report = run_resolved(&cfg, &res)?;
            for c in &report.checks {
                eprintln!(
                    "{} {}: {:.6e} (threshold {:.6e}) — {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold,
                    c.note
                );
            }
            print(&serde_json::to_value(&report)?);
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::CheckEos { config, h } => {
            let cfg = load(&config)?;
            let models = cfg.models()?;
            let (z, theta) = default_lattices();
            let report = hypothesis_report(&models.eos, &models.transport, &z, &theta);
            let gibbs = gibbs_samples(&models.eos, h)
                .map_err(|e| ScenarioError::Config { field: "models.eos".into(), message: e.to_string() })?;
            let worst = gibbs.iter().flat_map(|g| g.relative).fold(0.0_f64, f64::max);
            let ok = report.all_passed && worst < 1e-6;
            print(&json!({ "hypotheses": report, "gibbs": gibbs, "gibbs_max_relative_residual": worst, "passed": ok }));
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Stationarity { config } => {
            let cfg = load(&config)?;
            let (grid, spec) = (cfg.grid()?, cfg.boundary_spec()?);
            let verdict = stationarity_test(&grid, &spec, 0.0, SolverOptions::default());
            print(&serde_json::to_value(&verdict)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::HarmonicDim { config } => {
            let cfg = load(&config)?;
            let (grid, spec) = (cfg.grid()?, cfg.boundary_spec()?);
            let basis = harmonic_space(&grid, &spec)?;
            print(&serde_json::to_value(basis.summary())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::ExtendB { config, delta, dump } => {
            let cfg = load(&config)?;
            let (grid, spec) = (cfg.grid()?, cfg.boundary_spec()?);
            let ext = combined_extension(&grid, &spec, 0.0, Some(delta), SolverOptions::default())?;
            let l2 = |f| face_inner(&grid, f, f).sqrt();
            if let Some(stem) = &dump {
                let mut s = FluidState::rest(&grid, 1.0, 1.0);
                s.b = ext.b_total.clone();
                write_dump(stem, &grid, &s, Some(format!("magnetic lifting, delta = {delta}")))
                    .map_err(|e| ScenarioError::Io { path: stem.clone(), source: std::io::Error::other(e.to_string()) })?;
            }
            print(&json!({
                "delta": ext.delta,
                "delta0": ext.delta0,
                "stationary": ext.stationary,
                "l2_normal": l2(&ext.b_normal),
                "l2_tangential": l2(&ext.b_tangential),
                "l2_total": l2(&ext.b_total),
                "max_abs_total": ext.b_total.max_abs(),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { csv, output, columns } => {
            let format = plot_records(&csv, &output, &columns)?;
            eprintln!("wrote {} ({format:?})", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::StaticShell { r1, r2, theta_int, theta_ext, omega, gbar, kappa0, beta, nodes, profile } => {
            let omega = match omega.as_slice() {
                [w] => [0.0, 0.0, *w],
                [a, b, c] => [*a, *b, *c],
                _ => {
                    return Err(ScenarioError::Config {
                        field: "omega".into(),
                        message: "give one number or three comma-separated components".into(),
                    })
                }
            };
            let p = ShellParams { r1, r2, theta_int, theta_ext, omega, gbar, kappa0, beta, nodes, ..ShellParams::default() };
            let mut out = serde_json::to_value(static_shell(&p)?)?;
            if !profile {
                out.as_object_mut().expect("object").remove("profile");
            }
            print(&out);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
