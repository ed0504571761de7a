use serde::{Deserialize, Serialize};

use crate::elliptic::ExtensionSet;
use crate::grid::{face_to_cell, face_weight, Array3, BoundarySpec, CellField, EdgeField, Environment, FaceField, FluidState, Grid, Stagger};
use crate::solver::{apply_boundary_conditions, heating, GhostState, Models};
use crate::thermo::EosModel;

use super::DiagnosticsError;

/// Exponent of the density moment used by the pressure estimate, `5/3 + 1/15`.
pub const RHO_MOMENT_EXPONENT: f64 = 5.0 / 3.0 + 1.0 / 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyComponents {
    pub kinetic: f64,
    pub internal: f64,
    pub magnetic: f64,
    pub total: f64,
}

fn cell_vectors(grid: &Grid, f: &FaceField) -> Vec<[f64; 3]> {
    let [x, y, z] = face_to_cell(grid, f);
    x.data().iter().zip(y.data()).zip(z.data()).map(|((a, b), c)| [*a, *b, *c]).collect()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Midpoint-rule kinetic, internal and magnetic energy; face components are
/// averaged to cell centers before squaring.
pub fn total_energy(grid: &Grid, state: &FluidState, eos: &EosModel) -> EnergyComponents {
    let u = cell_vectors(grid, &state.u);
    let b = cell_vectors(grid, &state.b);
    let (mut k, mut e, mut m) = (0.0, 0.0, 0.0);
    for (c, (&rho, &theta)) in state.rho.data().iter().zip(state.theta.data()).enumerate() {
        k += 0.5 * rho * dot(u[c], u[c]);
        e += eos.energy_density_raw(rho, theta);
        m += 0.5 * dot(b[c], b[c]);
    }
    let v = grid.cell_volume();
    let (kinetic, internal, magnetic) = (k * v, e * v, m * v);
    EnergyComponents { kinetic, internal, magnetic, total: kinetic + internal + magnetic }
}

/// `∫ρs`.
pub fn total_entropy(grid: &Grid, state: &FluidState, eos: &EosModel) -> f64 {
    let s: f64 = state.rho.data().iter().zip(state.theta.data()).map(|(&r, &t)| eos.entropy_density_raw(r, t)).sum();
    s * grid.cell_volume()
}

/// `∫ρ^{5/3 + 1/15}`.
pub fn rho_moment(grid: &Grid, state: &FluidState) -> f64 {
    state.rho.data().iter().map(|r| r.max(0.0).powf(RHO_MOMENT_EXPONENT)).sum::<f64>() * grid.cell_volume()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallisticEnergy {
    /// `∫ [E − θ̃ρs − B_B·B]`.
    pub value: f64,
    /// `value − ∫ρM`.
    pub shifted: f64,
}

pub fn ballistic_energy(
    grid: &Grid,
    state: &FluidState,
    ext: &ExtensionSet,
    env: &Environment,
    eos: &EosModel,
) -> Result<BallisticEnergy, DiagnosticsError> {
    let theta_tilde = ext.theta_tilde.as_ref().ok_or(DiagnosticsError::NoReferenceTemperature)?;
    if let Some((c, &t)) = theta_tilde.data().iter().enumerate().find(|(_, t)| !(**t > 0.0)) {
        return Err(DiagnosticsError::NonPositiveReferenceTemperature { value: t, cell: unflatten(grid.n(), c) });
    }
    let u = cell_vectors(grid, &state.u);
    let b = cell_vectors(grid, &state.b);
    let bb = cell_vectors(grid, &ext.b_total);
    let (mut f, mut rm) = (0.0, 0.0);
    for (c, idx) in Array3::zeros(grid.n()).indices().enumerate() {
        let rho = state.rho.data()[c];
        let theta = state.theta.data()[c];
        f += 0.5 * rho * dot(u[c], u[c]) + eos.energy_density_raw(rho, theta) + 0.5 * dot(b[c], b[c])
            - theta_tilde.data()[c] * eos.entropy_density_raw(rho, theta)
            - dot(bb[c], b[c]);
        rm += rho * env.potential(state.t, grid.position(Stagger::Cell, idx));
    }
    let v = grid.cell_volume();
    Ok(BallisticEnergy { value: f * v, shifted: (f - rm) * v })
}

pub(crate) fn unflatten(n: [usize; 3], c: usize) -> [usize; 3] {
    [c % n[0], (c / n[0]) % n[1], c / (n[0] * n[1])]
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyProduction {
    /// `(1/θ)[S:∇u + κ|∇θ|²/θ + ζ|curl B|²]` at cell centers.
    pub density: CellField,
    pub integral: f64,
    /// Integrals of the viscous, conductive and Joule parts separately.
    pub parts: [f64; 3],
}

/// Cell average of `κ|∇θ|²` from the two faces bracketing each cell along every axis.
fn conduction(grid: &Grid, gh: &GhostState, models: &Models) -> CellField {
    let n = grid.n();
    let h = grid.h();
    let tr = &models.transport;
    let face_term = |a: usize, idx: [usize; 3]| {
        let s = idx.map(|v| v as isize);
        let mut l = s;
        l[a] -= 1;
        let (tl, tr_) = (gh.theta.at3(l), gh.theta.at3(s));
        let kappa = if idx[a] == 0 || idx[a] == n[a] {
            tr.kappa(0.5 * (tl + tr_))
        } else {
            0.5 * (tr.kappa(tl) + tr.kappa(tr_))
        };
        let g = (tr_ - tl) / h[a];
        kappa * g * g
    };
    CellField(Array3::from_fn(n, |idx| {
        (0..3)
            .map(|a| {
                let mut hi = idx;
                hi[a] += 1;
                0.5 * (face_term(a, idx) + face_term(a, hi))
            })
            .sum()
    }))
}

pub fn entropy_production(
    grid: &Grid,
    state: &FluidState,
    spec: &BoundarySpec,
    models: &Models,
) -> Result<EntropyProduction, DiagnosticsError> {
    let gh = apply_boundary_conditions(grid, state, spec, state.t, models)?;
    Ok(production_from_ghosts(grid, &gh, models))
}

pub(crate) fn production_from_ghosts(grid: &Grid, gh: &GhostState, models: &Models) -> EntropyProduction {
    let (visc, joule) = heating(grid, gh, &models.transport);
    let cond = conduction(grid, gh, models);
    let n = grid.n();
    let mut parts = [0.0; 3];
    let density = CellField(Array3::from_fn(n, |[i, j, k]| {
        let th = gh.theta.at(i as isize, j as isize, k as isize);
        let p = [visc.get(i, j, k) / th, cond.get(i, j, k) / (th * th), joule.get(i, j, k) / th];
        for (acc, v) in parts.iter_mut().zip(p) {
            *acc += v;
        }
        p[0] + p[1] + p[2]
    }));
    let v = grid.cell_volume();
    let parts = parts.map(|p| p * v);
    EntropyProduction { integral: density.data().iter().sum::<f64>() * v, density, parts }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationNorms {
    pub u: f64,
    pub theta_beta: f64,
    pub log_theta: f64,
    pub b: f64,
    /// Cells whose temperature was raised to the floor before the transforms.
    pub floor_hits: usize,
}

impl DissipationNorms {
    pub fn as_array(&self) -> [f64; 4] {
        [self.u, self.theta_beta, self.log_theta, self.b]
    }
}

/// Squared discrete H¹ norm of a face field: trapezoidal L² part plus differences
/// between neighbouring entries of each component along every axis.
pub(crate) fn face_h1_sq(grid: &Grid, f: &FaceField) -> f64 {
    let h = grid.h();
    let v = grid.cell_volume();
    let mut s = 0.0;
    for a in 0..3 {
        let arr = &f.c[a];
        let d = arr.dims();
        for idx in arr.indices() {
            let x = arr.get(idx[0], idx[1], idx[2]);
            s += face_weight(grid, a, idx[a]) * x * x;
            for b in 0..3 {
                if idx[b] + 1 < d[b] {
                    let mut nb = idx;
                    nb[b] += 1;
                    let g = (arr.get(nb[0], nb[1], nb[2]) - x) / h[b];
                    s += v * g * g;
                }
            }
        }
    }
    s
}

/// Squared discrete H¹ norm of a cell field.
pub(crate) fn cell_h1_sq(grid: &Grid, f: &Array3) -> f64 {
    let h = grid.h();
    let n = grid.n();
    let mut s = 0.0;
    for idx in f.indices() {
        let x = f.get(idx[0], idx[1], idx[2]);
        s += x * x;
        for b in 0..3 {
            if idx[b] + 1 < n[b] {
                let mut nb = idx;
                nb[b] += 1;
                let g = (f.get(nb[0], nb[1], nb[2]) - x) / h[b];
                s += g * g;
            }
        }
    }
    s * grid.cell_volume()
}

/// The four norms bounding the dissipation rate: `‖u‖_{H¹}`, `‖θ^{β/2}‖_{H¹}`,
/// `‖log θ‖_{H¹}`, `‖B‖_{H¹}`. Temperatures below `theta_floor` are raised to it.
pub fn dissipation_norms(grid: &Grid, state: &FluidState, beta: f64, theta_floor: f64) -> DissipationNorms {
    let mut floor_hits = 0;
    let theta: Vec<f64> = state
        .theta
        .data()
        .iter()
        .map(|&t| {
            if t < theta_floor {
                floor_hits += 1;
                theta_floor
            } else {
                t
            }
        })
        .collect();
    let n = grid.n();
    let tb = Array3::from_vec(n, theta.iter().map(|t| t.powf(0.5 * beta)).collect()).expect("cell dims");
    let lt = Array3::from_vec(n, theta.iter().map(|t| t.ln()).collect()).expect("cell dims");
    DissipationNorms {
        u: face_h1_sq(grid, &state.u).sqrt(),
        theta_beta: cell_h1_sq(grid, &tb).sqrt(),
        log_theta: cell_h1_sq(grid, &lt).sqrt(),
        b: face_h1_sq(grid, &state.b).sqrt(),
        floor_hits,
    }
}

/// Discrete L² norm of an edge field, with half weights for each wall the edge lies on.
pub fn edge_l2(grid: &Grid, e: &EdgeField) -> f64 {
    let n = grid.n();
    let v = grid.cell_volume();
    let mut s = 0.0;
    for (a, arr) in e.c.iter().enumerate() {
        for idx in arr.indices() {
            let mut w = v;
            for b in (0..3).filter(|&b| b != a) {
                if idx[b] == 0 || idx[b] == n[b] {
                    w *= 0.5;
                }
            }
            let x = arr.get(idx[0], idx[1], idx[2]);
            s += w * x * x;
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::TransportModel;

    #[test]
    fn uniform_field_adds_half_volume() {
        let g = Grid::new([4, 5, 3], [1.0, 2.0, 0.5]).unwrap();
        let eos = EosModel::default();
        let mut s = FluidState::rest(&g, 1.0, 1.3);
        let e0 = total_energy(&g, &s, &eos);
        s.b = FaceField::from_fn(&g, |_| [0.0, 0.0, 1.0]);
        let e1 = total_energy(&g, &s, &eos);
        assert!((e1.total - e0.total - 0.5 * g.volume()).abs() < 1e-13);
        assert!((e0.internal - eos.internal_energy(1.0, 1.3).unwrap() * g.volume()).abs() < 1e-12);
    }

    #[test]
    fn conduction_vanishes_for_uniform_temperature() {
        let g = Grid::cube(4).unwrap();
        let s = FluidState::rest(&g, 1.0, 2.0);
        let spec = BoundarySpec::uniform(
            crate::grid::FaceConditions {
                velocity: crate::grid::VelocityBc::NoSlip,
                thermal: crate::grid::ThermalBc::Dirichlet(crate::grid::ScalarData::constant(2.0)),
                magnetic: crate::grid::MagneticBc::NormalNeumann(crate::grid::ScalarData::constant(0.0)),
            },
            Environment::default(),
        );
        let m = Models { transport: TransportModel::default(), ..Models::default() };
        let p = entropy_production(&g, &s, &spec, &m).unwrap();
        assert_eq!(p.integral, 0.0);
    }
}
