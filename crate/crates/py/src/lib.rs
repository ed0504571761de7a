//! Python bindings: constitutive models, scenario configurations, a steppable
//! simulation handle and the boundary-data diagnostics.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use mhd_core::diagnostics::{total_energy, total_entropy};
use mhd_core::elliptic::{harmonic_space, stationarity_test, SolverOptions};
use mhd_core::grid::{BoundarySpec, CellField, FluidState, Grid};
use mhd_core::scenarios::{run_resolved, static_shell as shell, ScenarioConfig, ScenarioError, ShellParams, CANNED};
use mhd_core::solver::{run, stable_dt, step, Models, SolverConfig};
use mhd_core::thermo::{
    default_lattices, gibbs_samples, hypothesis_report, EosModel, EosParams, StructuralFunction, TransportModel,
};

create_exception!(mhd_py, MhdError, PyException);
create_exception!(mhd_py, ConfigError, MhdError);
create_exception!(mhd_py, NumericalError, MhdError);

fn scenario_err(e: ScenarioError) -> PyErr {
    match e.exit_code() {
        2 => ConfigError::new_err(e.to_string()),
        3 => NumericalError::new_err(e.to_string()),
        _ => MhdError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// serde value → plain Python objects, via the `json` module.
fn to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "EquationOfState", module = "mhd_py", frozen)]
struct PyEos {
    inner: EosModel,
}

#[pymethods]
impl PyEos {
    /// `p = θ^{5/2} P(ρ/θ^{3/2}) + aθ⁴/3`; `z_d=None` selects the ideal `P(Z) = Z`.
    #[new]
    #[pyo3(signature = (z_d = Some(1.0), radiation_constant = 1.0))]
    fn new(z_d: Option<f64>, radiation_constant: f64) -> PyResult<Self> {
        let structural = match z_d {
            Some(z_d) => StructuralFunction::Degenerate { z_d },
            None => StructuralFunction::Ideal,
        };
        let inner = EosModel::new(EosParams { radiation_constant, structural, ..Default::default() }).map_err(value_err)?;
        Ok(PyEos { inner })
    }

    fn pressure(&self, rho: f64, theta: f64) -> PyResult<f64> {
        self.inner.pressure(rho, theta).map_err(value_err)
    }

    fn internal_energy(&self, rho: f64, theta: f64) -> PyResult<f64> {
        self.inner.internal_energy(rho, theta).map_err(value_err)
    }

    fn entropy(&self, rho: f64, theta: f64) -> PyResult<f64> {
        self.inner.entropy(rho, theta).map_err(value_err)
    }

    /// Absolute residuals of the two Gibbs relations by central differences.
    #[pyo3(signature = (rho, theta, h = 1e-4))]
    fn gibbs_residual(&self, rho: f64, theta: f64, h: f64) -> PyResult<(f64, f64)> {
        let r = self.inner.gibbs_residual(rho, theta, h).map_err(value_err)?;
        Ok((r[0], r[1]))
    }

    fn __repr__(&self) -> String {
        format!("EquationOfState({:?})", self.inner.params())
    }
}

#[pyclass(name = "Transport", module = "mhd_py", frozen)]
struct PyTransport {
    inner: TransportModel,
}

#[pymethods]
impl PyTransport {
    #[new]
    #[pyo3(signature = (mu0 = 0.05, eta0 = 0.0, kappa0 = 0.01, beta = 6.5, zeta0 = 0.05))]
    fn new(mu0: f64, eta0: f64, kappa0: f64, beta: f64, zeta0: f64) -> Self {
        PyTransport { inner: TransportModel::new(mu0, eta0, kappa0, beta, zeta0) }
    }
    fn mu(&self, theta: f64) -> f64 {
        self.inner.mu(theta)
    }
    fn kappa(&self, theta: f64) -> f64 {
        self.inner.kappa(theta)
    }
}

/// Hypothesis report and Gibbs residuals for a pair of models.
#[pyfunction]
#[pyo3(signature = (eos = None, transport = None, h = 1e-4))]
fn check_eos<'py>(
    py: Python<'py>,
    eos: Option<&PyEos>,
    transport: Option<&PyTransport>,
    h: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let eos = eos.map(|e| e.inner.clone()).unwrap_or_default();
    let transport = transport.map(|t| t.inner.clone()).unwrap_or_default();
    let (z, theta) = default_lattices();
    let report = hypothesis_report(&eos, &transport, &z, &theta);
    let gibbs = gibbs_samples(&eos, h).map_err(value_err)?;
    let worst = gibbs.iter().flat_map(|g| g.relative).fold(0.0_f64, f64::max);
    let passed = report.all_passed && worst < 1e-6;
    to_py(
        py,
        &serde_json::json!({ "hypotheses": report, "gibbs": gibbs, "gibbs_max_relative_residual": worst, "passed": passed }),
    )
}

#[pyclass(name = "Scenario", module = "mhd_py", frozen)]
struct PyScenario {
    cfg: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    /// A built-in configuration by name (`equilibrium`, `blowup`, `absorbing`).
    #[staticmethod]
    fn canned(name: &str) -> PyResult<Self> {
        ScenarioConfig::canned(name)
            .map(|cfg| PyScenario { cfg })
            .ok_or_else(|| ConfigError::new_err(format!("unknown scenario `{name}`; built-in: {}", CANNED.join(", "))))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_json(text).map(|cfg| PyScenario { cfg }).map_err(scenario_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ScenarioConfig::load(&path).map(|cfg| PyScenario { cfg }).map_err(scenario_err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.cfg.name
    }

    #[getter]
    fn hash(&self) -> String {
        self.cfg.hash()
    }

    fn to_json(&self) -> String {
        self.cfg.to_json_pretty()
    }

    /// Copy with a different grid resolution, end time or output directory.
    #[pyo3(signature = (n = None, t_end = None, output_dir = None))]
    fn with_overrides(&self, n: Option<[usize; 3]>, t_end: Option<f64>, output_dir: Option<PathBuf>) -> Self {
        let mut cfg = self.cfg.clone();
        if let Some(n) = n {
            cfg.grid.n = n;
        }
        if let Some(t) = t_end {
            cfg.solver.t_end = t;
        }
        if let Some(d) = output_dir {
            cfg.output_dir = d;
        }
        PyScenario { cfg }
    }

    /// Run the scenario with its checks; returns the report as a dict.
    fn run<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let cfg = self.cfg.clone();
        let report = py.detach(move || cfg.resolve().and_then(|res| run_resolved(&cfg, &res))).map_err(scenario_err)?;
        to_py(py, &report)
    }

    /// Resolved initial state, ready to be stepped.
    fn simulation(&self) -> PyResult<PySimulation> {
        let res = self.cfg.resolve().map_err(scenario_err)?;
        Ok(PySimulation { grid: res.grid, spec: res.spec, models: res.models, solver: self.cfg.solver.clone(), state: res.initial })
    }

    fn stationarity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let (grid, spec) = (self.cfg.grid().map_err(scenario_err)?, self.cfg.boundary_spec().map_err(scenario_err)?);
        to_py(py, &stationarity_test(&grid, &spec, 0.0, SolverOptions::default()))
    }

    fn harmonic_dimension(&self) -> PyResult<usize> {
        let (grid, spec) = (self.cfg.grid().map_err(scenario_err)?, self.cfg.boundary_spec().map_err(scenario_err)?);
        Ok(harmonic_space(&grid, &spec).map_err(|e| scenario_err(e.into()))?.dim())
    }
}

#[pyclass(name = "Simulation", module = "mhd_py")]
struct PySimulation {
    grid: Grid,
    spec: BoundarySpec,
    models: Models,
    solver: SolverConfig,
    state: FluidState,
}

fn numerical(e: impl std::fmt::Display) -> PyErr {
    NumericalError::new_err(e.to_string())
}

#[pymethods]
impl PySimulation {
    #[getter]
    fn time(&self) -> f64 {
        self.state.t
    }

    #[getter]
    fn shape(&self) -> [usize; 3] {
        self.grid.n()
    }

    /// Take `n` steps at the stable step size; returns the last step size.
    #[pyo3(signature = (n = 1))]
    fn step(&mut self, n: usize) -> PyResult<f64> {
        let mut dt = 0.0;
        for _ in 0..n {
            dt = stable_dt(&self.grid, &self.state, &self.spec, &self.solver, &self.models).map_err(numerical)?;
            self.state = step(&self.grid, &self.state, &self.spec, &self.solver, &self.models, dt).map_err(numerical)?;
        }
        Ok(dt)
    }

    /// Integrate to `t_end`; returns the number of steps taken.
    fn advance(&mut self, py: Python<'_>, t_end: f64) -> PyResult<usize> {
        let cfg = SolverConfig { t_end, ..self.solver.clone() };
        let Self { grid, spec, models, state, .. } = self;
        let summary = py.detach(|| run(grid, state, spec, &cfg, models, &mut |_, _| {})).map_err(numerical)?;
        Ok(summary.steps)
    }

    fn mass(&self) -> f64 {
        self.state.mass(&self.grid)
    }

    fn entropy(&self) -> f64 {
        total_entropy(&self.grid, &self.state, &self.models.eos)
    }

    /// Kinetic, internal, magnetic and total energy.
    fn energy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &total_energy(&self.grid, &self.state, &self.models.eos))
    }

    /// Cell field `rho` or `theta` as a flat list, x fastest.
    fn field(&self, name: &str) -> PyResult<Vec<f64>> {
        let f: &CellField = match name {
            "rho" => &self.state.rho,
            "theta" => &self.state.theta,
            _ => return Err(PyValueError::new_err(format!("no cell field `{name}`; use rho or theta"))),
        };
        Ok(f.data().to_vec())
    }
}

/// Radial conduction between two spheres and the static-state obstruction.
#[pyfunction]
#[pyo3(signature = (r1 = 1.0, r2 = 2.0, theta_int = 2.0, theta_ext = 1.0, omega = [0.0, 0.0, 1.0], gbar = 1.0, kappa0 = 1.0, beta = None, nodes = 201))]
#[allow(clippy::too_many_arguments)]
fn static_shell<'py>(
    py: Python<'py>,
    r1: f64,
    r2: f64,
    theta_int: f64,
    theta_ext: f64,
    omega: [f64; 3],
    gbar: f64,
    kappa0: f64,
    beta: Option<f64>,
    nodes: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let p = ShellParams { r1, r2, theta_int, theta_ext, omega, gbar, kappa0, beta, nodes, ..ShellParams::default() };
    to_py(py, &shell(&p).map_err(scenario_err)?)
}

#[pymodule]
fn mhd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEos>()?;
    m.add_class::<PyTransport>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(check_eos, m)?)?;
    m.add_function(wrap_pyfunction!(static_shell, m)?)?;
    m.add("MhdError", m.py().get_type::<MhdError>())?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("CANNED", CANNED.to_vec())?;
    Ok(())
}
