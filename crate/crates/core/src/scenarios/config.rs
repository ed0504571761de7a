use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::MonitorOptions;
use crate::elliptic::{combined_extension, SolverOptions};
use crate::grid::{
    curl_edge_to_face, validate_boundary_spec, BoundarySpec, CellField, EdgeField, Environment, Face, FaceConditions,
    FaceField, FluidState, Grid, MagneticBc, ScalarData, ThermalBc, VectorData, VelocityBc,
};
use crate::solver::{Models, SolverConfig};
use crate::thermo::{EosModel, EosParams, TransportModel};

use super::expr::Expr;
use super::ScenarioError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Equilibrium,
    Blowup,
    Absorbing,
    /// Run and monitor only; no scenario-specific checks.
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: [usize; 3],
    #[serde(default = "unit_lengths")]
    pub lengths: [f64; 3],
    #[serde(default)]
    pub origin: [f64; 3],
}

fn unit_lengths() -> [f64; 3] {
    [1.0; 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityTag {
    NoSlip,
    Slip,
    NavierSlip { d: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThermalTag {
    /// `theta` is an expression for the wall temperature.
    Dirichlet {
        #[serde(default)]
        theta: Option<String>,
    },
    Insulated,
    Radiative { d: f64, theta0: f64, k: f64 },
}

/// Magnetic data. `tangential` takes either the wall field `b` (so that
/// `b_τ = b × n`) or `b_tau` itself; `normal` takes either `b_n = B·n` with the
/// outward normal or a field `b` whose normal component is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MagneticTag {
    Tangential {
        #[serde(default)]
        b: Option<[String; 3]>,
        #[serde(default)]
        b_tau: Option<[String; 3]>,
    },
    Normal {
        #[serde(default)]
        b_n: Option<String>,
        #[serde(default)]
        b: Option<[String; 3]>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceBlock {
    pub velocity: VelocityTag,
    pub thermal: ThermalTag,
    pub magnetic: MagneticTag,
}

/// Per-face override of the default block.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacePatch {
    #[serde(default)]
    pub velocity: Option<VelocityTag>,
    #[serde(default)]
    pub thermal: Option<ThermalTag>,
    #[serde(default)]
    pub magnetic: Option<MagneticTag>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryBlock {
    pub default: FaceBlock,
    #[serde(default)]
    pub faces: BTreeMap<Face, FacePatch>,
    /// Gravitational potential `G`.
    #[serde(default = "zero_expr")]
    pub gravity: String,
    #[serde(default)]
    pub omega: [f64; 3],
}

fn zero_expr() -> String {
    "0".into()
}

fn zero_vec() -> [String; 3] {
    ["0".into(), "0".into(), "0".into()]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialField {
    /// Constant part.
    #[serde(default)]
    pub uniform: [f64; 3],
    /// Edge vector potential `A`; `curl A` is added, so the field stays discretely solenoidal.
    #[serde(default)]
    pub potential: Option<[String; 3]>,
    /// Add the lifting of the magnetic boundary data.
    #[serde(default)]
    pub from_boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub rho: String,
    pub theta: String,
    #[serde(default = "zero_vec")]
    pub u: [String; 3],
    #[serde(default)]
    pub b: InitialField,
    /// Amplitude of seeded uniform noise added to interior velocity faces.
    #[serde(default)]
    pub u_noise: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsBlock {
    #[serde(default)]
    pub eos: EosParams,
    #[serde(default)]
    pub transport: TransportModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsBlock {
    pub monitor: MonitorOptions,
    /// Cutoff width of the magnetic lifting; `None` selects half the default collar.
    pub delta: Option<f64>,
    /// Track moments against the harmonic fields.
    pub harmonic: bool,
    pub jsonl: bool,
}

impl Default for DiagnosticsBlock {
    fn default() -> Self {
        DiagnosticsBlock { monitor: MonitorOptions::default(), delta: None, harmonic: true, jsonl: true }
    }
}

/// Pass/fail thresholds. The growth factor and band width are quantitative
/// stand-ins for qualitative statements (unbounded energy, a common absorbing set).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksBlock {
    /// Required `‖u(t_end)‖ / ‖u(0)‖` upper bound.
    pub velocity_decay: f64,
    /// Required reduction factor of `‖θ − θ_B‖`.
    pub theta_reduction: f64,
    /// Required `E(t_end) / E(t_end/2)` lower bound.
    pub growth_factor: f64,
    /// Allowed relative spread of the terminal energies.
    pub band_width: f64,
    /// The absorbing level is this factor times the largest terminal energy.
    pub band_margin: f64,
}

impl Default for ChecksBlock {
    fn default() -> Self {
        ChecksBlock { velocity_decay: 1e-3, theta_reduction: 100.0, growth_factor: 1.2, band_width: 0.5, band_margin: 1.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBlock {
    /// Initial energies relative to the configured initial state.
    pub energy_ratios: Vec<f64>,
    #[serde(default = "yes")]
    pub parallel: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Named constants usable in every expression.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub grid: GridBlock,
    pub boundary: BoundaryBlock,
    pub initial: InitialBlock,
    #[serde(default)]
    pub models: ModelsBlock,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsBlock,
    #[serde(default)]
    pub checks: ChecksBlock,
    #[serde(default)]
    pub family: Option<FamilyBlock>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Everything needed to run, built from a validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub grid: Grid,
    pub spec: BoundarySpec,
    pub models: Models,
    pub initial: FluidState,
}

fn cfg_err(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Config { field: field.into(), message: message.into() }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Schema { line: e.line(), column: e.column(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(serde_json::to_string(self).expect("configs serialize").as_bytes()))
    }

    fn expr(&self, field: &str, text: &str) -> Result<Expr, ScenarioError> {
        Expr::parse(text, &self.params).map_err(|e| cfg_err(field, e.to_string()))
    }

    fn scalar(&self, field: &str, text: &str) -> Result<ScalarData, ScenarioError> {
        let e = self.expr(field, text)?;
        Ok(ScalarData::new(text, e.depends_on_time(), move |t, x| e.eval(t, x)))
    }

    fn vector(&self, field: &str, texts: &[String; 3], f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Result<VectorData, ScenarioError> {
        let es = [0, 1, 2].map(|i| self.expr(&format!("{field}[{i}]"), &texts[i]));
        let [a, b, c] = es;
        let es = [a?, b?, c?];
        let td = es.iter().any(Expr::depends_on_time);
        let label = format!("[{}, {}, {}]", texts[0], texts[1], texts[2]);
        Ok(VectorData::new(label, td, move |t, x| f([es[0].eval(t, x), es[1].eval(t, x), es[2].eval(t, x)])))
    }

    fn face_conditions(&self, face: Face) -> Result<FaceConditions, ScenarioError> {
        let patch = self.boundary.faces.get(&face).cloned().unwrap_or_default();
        let d = &self.boundary.default;
        let base = format!("boundary.faces.{}", face.name());
        let velocity = match patch.velocity.as_ref().unwrap_or(&d.velocity) {
            VelocityTag::NoSlip => VelocityBc::NoSlip,
            VelocityTag::Slip => VelocityBc::Slip,
            VelocityTag::NavierSlip { d } => VelocityBc::NavierSlip { d: *d },
        };
        let thermal = match patch.thermal.as_ref().unwrap_or(&d.thermal) {
            ThermalTag::Dirichlet { theta: Some(t) } => ThermalBc::Dirichlet(self.scalar(&format!("{base}.thermal.theta"), t)?),
            ThermalTag::Dirichlet { theta: None } => {
                return Err(cfg_err(format!("{base}.thermal"), format!("face {face} is Dirichlet but gives no `theta`")))
            }
            ThermalTag::Insulated => ThermalBc::Insulated,
            ThermalTag::Radiative { d, theta0, k } => ThermalBc::Radiative { d: *d, theta0: *theta0, k: *k },
        };
        let nrm = face.normal();
        let field = format!("{base}.magnetic");
        let magnetic = match patch.magnetic.as_ref().unwrap_or(&d.magnetic) {
            MagneticTag::Tangential { b: Some(b), b_tau: None } => {
                MagneticBc::TangentialDirichlet(self.vector(&format!("{field}.b"), b, move |v| cross(v, nrm))?)
            }
            MagneticTag::Tangential { b: None, b_tau: Some(b) } => {
                MagneticBc::TangentialDirichlet(self.vector(&format!("{field}.b_tau"), b, |v| v)?)
            }
            MagneticTag::Tangential { .. } => {
                return Err(cfg_err(field, format!("face {face}: give exactly one of `b` and `b_tau`")))
            }
            MagneticTag::Normal { b_n: Some(e), b: None } => MagneticBc::NormalNeumann(self.scalar(&format!("{field}.b_n"), e)?),
            MagneticTag::Normal { b_n: None, b: Some(b) } => {
                let v = self.vector(&format!("{field}.b"), b, |v| v)?;
                let a = face.axis();
                let s = face.sign();
                let label = format!("{s}*({})", v.label());
                MagneticBc::NormalNeumann(ScalarData::new(label, v.time_dependent(), move |t, x| s * v.eval(t, x)[a]))
            }
            MagneticTag::Normal { .. } => return Err(cfg_err(field, format!("face {face}: give exactly one of `b_n` and `b`"))),
        };
        Ok(FaceConditions { velocity, thermal, magnetic })
    }

    pub fn boundary_spec(&self) -> Result<BoundarySpec, ScenarioError> {
        let faces = [0, 1, 2, 3, 4, 5].map(|i| self.face_conditions(Face::ALL[i]));
        let [a, b, c, d, e, f] = faces;
        let env = Environment {
            gravity: self.scalar("boundary.gravity", &self.boundary.gravity)?,
            omega: self.boundary.omega,
            total_mass: None,
        };
        Ok(BoundarySpec { faces: [a?, b?, c?, d?, e?, f?], env })
    }

    pub fn grid(&self) -> Result<Grid, ScenarioError> {
        let g = &self.grid;
        if g.n.iter().any(|&n| n > 32) {
            return Err(cfg_err("grid.n", format!("at most 32 cells per axis, got {:?}", g.n)));
        }
        Grid::with_origin(g.n, g.lengths, g.origin).map_err(|e| cfg_err("grid", e.to_string()))
    }

    pub fn models(&self) -> Result<Models, ScenarioError> {
        let eos = EosModel::new(self.models.eos.clone()).map_err(|e| cfg_err("models.eos", e.to_string()))?;
        self.models.transport.validate().map_err(|e| cfg_err("models.transport", e.to_string()))?;
        Ok(Models { eos, transport: self.models.transport.clone() })
    }

    pub fn initial_state(&self, grid: &Grid, spec: &BoundarySpec) -> Result<FluidState, ScenarioError> {
        let ini = &self.initial;
        let rho = self.expr("initial.rho", &ini.rho)?;
        let theta = self.expr("initial.theta", &ini.theta)?;
        let u = [0, 1, 2].map(|i| self.expr(&format!("initial.u[{i}]"), &ini.u[i]));
        let [ux, uy, uz] = u;
        let u = [ux?, uy?, uz?];
        let mut s = FluidState::rest(grid, 1.0, 1.0);
        s.rho = CellField::from_fn(grid, |x| rho.eval(0.0, x));
        s.theta = CellField::from_fn(grid, |x| theta.eval(0.0, x));
        if let Some((c, v)) = s.rho.data().iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(cfg_err("initial.rho", format!("density {v} at cell {c} is not positive")));
        }
        if let Some((c, v)) = s.theta.data().iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(cfg_err("initial.theta", format!("temperature {v} at cell {c} is not positive")));
        }
        s.u = FaceField::from_fn(grid, |x| [u[0].eval(0.0, x), u[1].eval(0.0, x), u[2].eval(0.0, x)]);
        if ini.u_noise != 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for a in 0..3 {
                for v in s.u.c[a].data_mut() {
                    *v += ini.u_noise * rng.gen_range(-1.0..1.0);
                }
            }
        }
        // Impermeable walls.
        let n = grid.n();
        for a in 0..3 {
            let arr = &mut s.u.c[a];
            for idx in arr.indices().collect::<Vec<_>>() {
                if idx[a] == 0 || idx[a] == n[a] {
                    arr.set(idx[0], idx[1], idx[2], 0.0);
                }
            }
        }
        s.b = FaceField::from_fn(grid, |_| ini.b.uniform);
        if let Some(p) = &ini.b.potential {
            let es = [0, 1, 2].map(|i| self.expr(&format!("initial.b.potential[{i}]"), &p[i]));
            let [a, b, c] = es;
            let es = [a?, b?, c?];
            let pot = EdgeField::from_fn(grid, |x| [es[0].eval(0.0, x), es[1].eval(0.0, x), es[2].eval(0.0, x)]);
            s.b.axpy(1.0, &curl_edge_to_face(grid, &pot)?);
        }
        if ini.b.from_boundary {
            let ext = combined_extension(grid, spec, 0.0, self.diagnostics.delta, SolverOptions::default())
                .map_err(|e| cfg_err("initial.b.from_boundary", e.to_string()))?;
            s.b.axpy(1.0, &ext.b_total);
        }
        Ok(s)
    }

    /// Parse every expression, build all objects and check boundary compatibility.
    pub fn resolve(&self) -> Result<Resolved, ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(cfg_err("name", "must not be empty"));
        }
        let grid = self.grid()?;
        let spec = self.boundary_spec()?;
        let report = validate_boundary_spec(&spec, &grid, 0.0);
        if let Some(v) = report.violations.first() {
            let field = v.face.map_or("boundary".to_string(), |f| format!("boundary.faces.{}", f.name()));
            return Err(cfg_err(field, format!("{}: {}", v.rule, v.detail)));
        }
        let models = self.models()?;
        self.solver.validate(0.0).map_err(|e| cfg_err("solver", e.to_string()))?;
        if let Some(f) = &self.family {
            if f.energy_ratios.is_empty() || f.energy_ratios.iter().any(|r| !(*r > 0.0)) {
                return Err(cfg_err("family.energy_ratios", "ratios must be positive and non-empty"));
            }
        }
        if self.scenario == ScenarioKind::Absorbing && self.family.is_none() {
            return Err(cfg_err("family", "the absorbing scenario needs a `family` block"));
        }
        let initial = self.initial_state(&grid, &spec)?;
        Ok(Resolved { grid, spec, models, initial })
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
