//! Face-wise boundary partition and boundary data.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{surface_integral, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    XLo,
    XHi,
    YLo,
    YHi,
    ZLo,
    ZHi,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XLo, Face::XHi, Face::YLo, Face::YHi, Face::ZLo, Face::ZHi];

    pub fn new(axis: usize, side: usize) -> Face {
        Face::ALL[2 * axis + side]
    }
    pub fn axis(self) -> usize {
        self as usize / 2
    }
    /// 0 for the low wall, 1 for the high wall.
    pub fn side(self) -> usize {
        self as usize % 2
    }
    pub fn index(self) -> usize {
        self as usize
    }
    /// Outward unit normal.
    pub fn normal(self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axis()] = if self.side() == 0 { -1.0 } else { 1.0 };
        n
    }
    pub fn sign(self) -> f64 {
        if self.side() == 0 {
            -1.0
        } else {
            1.0
        }
    }
    pub fn name(self) -> &'static str {
        ["x_lo", "x_hi", "y_lo", "y_hi", "z_lo", "z_hi"][self as usize]
    }
    pub fn opposite(self) -> Face {
        Face::new(self.axis(), 1 - self.side())
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type ScalarFn = dyn Fn(f64, [f64; 3]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(f64, [f64; 3]) -> [f64; 3] + Send + Sync;

/// Scalar boundary or environment datum `g(t, x)`.
#[derive(Clone)]
pub struct ScalarData {
    f: Arc<ScalarFn>,
    time_dependent: bool,
    label: String,
}

impl ScalarData {
    pub fn constant(c: f64) -> Self {
        ScalarData { f: Arc::new(move |_, _| c), time_dependent: false, label: format!("{c}") }
    }
    pub fn new(
        label: impl Into<String>,
        time_dependent: bool,
        f: impl Fn(f64, [f64; 3]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarData { f: Arc::new(f), time_dependent, label: label.into() }
    }
    #[inline]
    pub fn eval(&self, t: f64, x: [f64; 3]) -> f64 {
        (self.f)(t, x)
    }
    pub fn time_dependent(&self) -> bool {
        self.time_dependent
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn scaled(&self, s: f64) -> Self {
        let f = self.f.clone();
        ScalarData {
            f: Arc::new(move |t, x| s * f(t, x)),
            time_dependent: self.time_dependent,
            label: format!("{s}*({})", self.label),
        }
    }
}

impl fmt::Debug for ScalarData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarData({})", self.label)
    }
}

/// Vector boundary datum `b(t, x)`.
#[derive(Clone)]
pub struct VectorData {
    f: Arc<VectorFn>,
    time_dependent: bool,
    label: String,
}

impl VectorData {
    pub fn constant(c: [f64; 3]) -> Self {
        VectorData { f: Arc::new(move |_, _| c), time_dependent: false, label: format!("{c:?}") }
    }
    pub fn new(
        label: impl Into<String>,
        time_dependent: bool,
        f: impl Fn(f64, [f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        VectorData { f: Arc::new(f), time_dependent, label: label.into() }
    }
    #[inline]
    pub fn eval(&self, t: f64, x: [f64; 3]) -> [f64; 3] {
        (self.f)(t, x)
    }
    pub fn time_dependent(&self) -> bool {
        self.time_dependent
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn scaled(&self, s: f64) -> Self {
        let f = self.f.clone();
        VectorData {
            f: Arc::new(move |t, x| f(t, x).map(|v| s * v)),
            time_dependent: self.time_dependent,
            label: format!("{s}*({})", self.label),
        }
    }
}

impl fmt::Debug for VectorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorData({})", self.label)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum VelocityBc {
    NoSlip,
    Slip,
    /// Tangential traction balances `d·u_τ`.
    NavierSlip { d: f64 },
}

#[derive(Clone, Debug)]
pub enum ThermalBc {
    Dirichlet(ScalarData),
    Insulated,
    /// Heat flux `q·n = d |θ − θ₀|^k (θ − θ₀)`.
    Radiative { d: f64, theta0: f64, k: f64 },
}

#[derive(Clone, Debug)]
pub enum MagneticBc {
    /// Prescribes `B × n = b_τ`.
    TangentialDirichlet(VectorData),
    /// Prescribes `B · n = b_ν`.
    NormalNeumann(ScalarData),
}

impl MagneticBc {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, MagneticBc::TangentialDirichlet(_))
    }
}

#[derive(Clone, Debug)]
pub struct FaceConditions {
    pub velocity: VelocityBc,
    pub thermal: ThermalBc,
    pub magnetic: MagneticBc,
}

#[derive(Clone, Debug)]
pub struct Environment {
    /// Gravitational potential `G(t, x)`.
    pub gravity: ScalarData,
    /// Angular velocity of the frame.
    pub omega: [f64; 3],
    pub total_mass: Option<f64>,
}

impl Default for Environment {
    fn default() -> Self {
        Environment { gravity: ScalarData::constant(0.0), omega: [0.0; 3], total_mass: None }
    }
}

impl Environment {
    /// `M = G + ½|ω × x|²`.
    pub fn potential(&self, t: f64, x: [f64; 3]) -> f64 {
        let w = self.omega;
        let c = [w[1] * x[2] - w[2] * x[1], w[2] * x[0] - w[0] * x[2], w[0] * x[1] - w[1] * x[0]];
        self.gravity.eval(t, x) + 0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2])
    }
}

#[derive(Clone, Debug)]
pub struct BoundarySpec {
    pub faces: [FaceConditions; 6],
    pub env: Environment,
}

impl BoundarySpec {
    /// Same conditions on every face.
    pub fn uniform(fc: FaceConditions, env: Environment) -> Self {
        BoundarySpec { faces: std::array::from_fn(|_| fc.clone()), env }
    }

    pub fn face(&self, f: Face) -> &FaceConditions {
        &self.faces[f.index()]
    }

    pub fn face_mut(&mut self, f: Face) -> &mut FaceConditions {
        &mut self.faces[f.index()]
    }

    pub fn magnetic_dirichlet_faces(&self) -> Vec<Face> {
        Face::ALL.into_iter().filter(|f| self.face(*f).magnetic.is_dirichlet()).collect()
    }

    pub fn magnetic_neumann_faces(&self) -> Vec<Face> {
        Face::ALL.into_iter().filter(|f| !self.face(*f).magnetic.is_dirichlet()).collect()
    }

    pub fn thermal_dirichlet_faces(&self) -> Vec<Face> {
        Face::ALL
            .into_iter()
            .filter(|f| matches!(self.face(*f).thermal, ThermalBc::Dirichlet(_)))
            .collect()
    }

    pub fn is_insulated(&self) -> bool {
        self.faces.iter().all(|f| matches!(f.thermal, ThermalBc::Insulated))
    }

    /// Whether any magnetic datum depends on time.
    pub fn magnetic_time_dependent(&self) -> bool {
        self.faces.iter().any(|f| match &f.magnetic {
            MagneticBc::TangentialDirichlet(d) => d.time_dependent(),
            MagneticBc::NormalNeumann(d) => d.time_dependent(),
        })
    }

    pub fn thermal_time_dependent(&self) -> bool {
        self.faces.iter().any(|f| matches!(&f.thermal, ThermalBc::Dirichlet(d) if d.time_dependent()))
    }

    /// Multiply all magnetic data by `s`.
    pub fn scale_magnetic(&self, s: f64) -> Self {
        let mut out = self.clone();
        for f in out.faces.iter_mut() {
            f.magnetic = match &f.magnetic {
                MagneticBc::TangentialDirichlet(d) => MagneticBc::TangentialDirichlet(d.scaled(s)),
                MagneticBc::NormalNeumann(d) => MagneticBc::NormalNeumann(d.scaled(s)),
            };
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryViolation {
    pub face: Option<Face>,
    pub rule: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct BoundaryReport {
    pub violations: Vec<BoundaryViolation>,
}

impl BoundaryReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample points at the centers of the cells of a box face.
pub(crate) fn face_samples(grid: &Grid, face: Face) -> Vec<[f64; 3]> {
    let a = face.axis();
    let (b, c) = Grid::tangential_axes(a);
    let n = grid.n();
    let h = grid.h();
    let o = grid.origin();
    let mut pts = Vec::with_capacity(n[b] * n[c]);
    for jc in 0..n[c] {
        for jb in 0..n[b] {
            let mut p = [0.0; 3];
            p[a] = grid.wall(a, face.side());
            p[b] = o[b] + (jb as f64 + 0.5) * h[b];
            p[c] = o[c] + (jc as f64 + 0.5) * h[c];
            pts.push(p);
        }
    }
    pts
}

/// Check the partition and data compatibility conditions at time `t`.
pub fn validate_boundary_spec(spec: &BoundarySpec, grid: &Grid, t: f64) -> BoundaryReport {
    let mut v = Vec::new();
    for face in Face::ALL {
        let fc = spec.face(face);
        if let VelocityBc::NavierSlip { d } = fc.velocity {
            if !(d >= 0.0 && d.is_finite()) {
                v.push(BoundaryViolation {
                    face: Some(face),
                    rule: "navier_coefficient",
                    detail: format!("slip coefficient must be nonnegative, got {d}"),
                });
            }
        }
        match &fc.thermal {
            ThermalBc::Dirichlet(data) => {
                let min = face_samples(grid, face).iter().map(|p| data.eval(t, *p)).fold(f64::INFINITY, f64::min);
                if !(min > 0.0 && min.is_finite()) {
                    v.push(BoundaryViolation {
                        face: Some(face),
                        rule: "theta_positive",
                        detail: format!("boundary temperature must be positive, min sampled value {min}"),
                    });
                }
            }
            ThermalBc::Radiative { d, theta0, k } => {
                if !(*d >= 0.0 && *theta0 > 0.0 && *k >= 0.0) {
                    v.push(BoundaryViolation {
                        face: Some(face),
                        rule: "radiative_parameters",
                        detail: format!("need d ≥ 0, θ₀ > 0, k ≥ 0; got d={d}, θ₀={theta0}, k={k}"),
                    });
                }
            }
            ThermalBc::Insulated => {}
        }
        if let MagneticBc::TangentialDirichlet(data) = &fc.magnetic {
            let n = face.normal();
            let mut worst = 0.0_f64;
            let mut scale = 0.0_f64;
            for p in face_samples(grid, face) {
                let b = data.eval(t, p);
                worst = worst.max((b[0] * n[0] + b[1] * n[1] + b[2] * n[2]).abs());
                scale = scale.max(b.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
            }
            if !(worst <= 1e-12 * (1.0 + scale)) {
                v.push(BoundaryViolation {
                    face: Some(face),
                    rule: "b_tau_tangent",
                    detail: format!("b_tau has normal component up to {worst:e}"),
                });
            }
        }
    }
    if spec.magnetic_dirichlet_faces().is_empty() {
        let mut total = 0.0;
        let mut abs = 0.0;
        for face in Face::ALL {
            if let MagneticBc::NormalNeumann(data) = &spec.face(face).magnetic {
                total += surface_integral(grid, face, |p| data.eval(t, p));
                abs += surface_integral(grid, face, |p| data.eval(t, p).abs());
            }
        }
        if total.abs() > 1e-12 * abs.max(1e-300) && total.abs() > 1e-14 {
            v.push(BoundaryViolation {
                face: None,
                rule: "zero_net_flux",
                detail: format!("all faces normal-tagged but net flux of b_nu is {total:e}"),
            });
        }
    }
    if let Some(m) = spec.env.total_mass {
        if !(m > 0.0 && m.is_finite()) {
            v.push(BoundaryViolation {
                face: None,
                rule: "total_mass",
                detail: format!("total mass must be positive, got {m}"),
            });
        }
    }
    BoundaryReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fc(magnetic: MagneticBc) -> FaceConditions {
        FaceConditions { velocity: VelocityBc::NoSlip, thermal: ThermalBc::Dirichlet(ScalarData::constant(1.0)), magnetic }
    }

    #[test]
    fn all_dirichlet_constant_temperature_passes() {
        let g = Grid::cube(4).unwrap();
        let spec = BoundarySpec::uniform(fc(MagneticBc::NormalNeumann(ScalarData::constant(0.0))), Environment::default());
        assert!(validate_boundary_spec(&spec, &g, 0.0).is_valid());
    }

    #[test]
    fn constant_normal_flux_without_dirichlet_is_flagged() {
        let g = Grid::cube(4).unwrap();
        let spec = BoundarySpec::uniform(fc(MagneticBc::NormalNeumann(ScalarData::constant(0.7))), Environment::default());
        let r = validate_boundary_spec(&spec, &g, 0.0);
        assert!(r.violations.iter().any(|v| v.rule == "zero_net_flux"));
    }

    #[test]
    fn normal_component_in_b_tau_is_flagged() {
        let g = Grid::cube(4).unwrap();
        let mut spec =
            BoundarySpec::uniform(fc(MagneticBc::NormalNeumann(ScalarData::constant(0.0))), Environment::default());
        spec.face_mut(Face::ZHi).magnetic = MagneticBc::TangentialDirichlet(VectorData::constant([0.0, 0.0, 1.0]));
        let r = validate_boundary_spec(&spec, &g, 0.0);
        assert!(r.violations.iter().any(|v| v.rule == "b_tau_tangent" && v.face == Some(Face::ZHi)));
    }

    #[test]
    fn nonpositive_temperature_is_flagged() {
        let g = Grid::cube(4).unwrap();
        let mut spec =
            BoundarySpec::uniform(fc(MagneticBc::NormalNeumann(ScalarData::constant(0.0))), Environment::default());
        spec.face_mut(Face::XLo).thermal = ThermalBc::Dirichlet(ScalarData::constant(-1.0));
        assert!(!validate_boundary_spec(&spec, &g, 0.0).is_valid());
    }
}
