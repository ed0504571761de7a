//! Lifting of the magnetic and thermal boundary data into the domain.

use crate::grid::{
    boundary::face_samples, div, BoundarySpec, CellField, Face, FaceField, Grid, MagneticBc, Stagger,
};

use super::bogovskii::{bogovskii, CellMask};
use super::krylov::SolverOptions;
use super::poisson::{harmonic_extension_temperature, poisson_mixed, FaceCondition};
use super::stationarity::{gradient_with_traces, stationarity_test, StationarityVerdict};
use super::EllipticError;

/// Boundary data lifted into the domain.
#[derive(Clone, Debug)]
pub struct ExtensionSet {
    /// Harmonic temperature extension; `None` when no face carries a temperature.
    pub theta_tilde: Option<CellField>,
    pub b_normal: FaceField,
    pub b_tangential: FaceField,
    pub b_total: FaceField,
    pub delta: f64,
    pub delta0: f64,
    /// Whether the magnetic data admitted a curl-free extension, in which case
    /// `b_normal` is that extension and `b_tangential` vanishes.
    pub stationary: bool,
}

fn smootherstep_integral(u: f64) -> f64 {
    // ∫₀ᵘ (6s⁵ − 15s⁴ + 10s³) ds
    u.powi(6) - 3.0 * u.powi(5) + 2.5 * u.powi(4)
}

/// `∫₀^z χ(s) ds` for the cutoff χ = 1 on [0, ½], quintic decay to 0 at 1.
fn cutoff_antiderivative(z: f64) -> f64 {
    if z <= 0.5 {
        z.max(0.0)
    } else if z < 1.0 {
        let u = 2.0 * (z - 0.5);
        z - 0.5 * smootherstep_integral(u)
    } else {
        0.75
    }
}

/// Cutoff value χ(z).
pub fn cutoff(z: f64) -> f64 {
    if z <= 0.5 {
        1.0
    } else if z < 1.0 {
        let u = 2.0 * (z - 0.5);
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    } else {
        0.0
    }
}

/// Mean of `χ(s/δ)` over `s ∈ [d − h/2, d + h/2]`.
fn cell_averaged_cutoff(d: f64, h: f64, delta: f64) -> f64 {
    let lo = (d - 0.5 * h).max(0.0);
    let hi = d + 0.5 * h;
    delta * (cutoff_antiderivative(hi / delta) - cutoff_antiderivative(lo / delta)) / (hi - lo)
}

/// Default collar width: a quarter of the smallest extent across a Dirichlet face,
/// but at least four cells.
pub fn default_delta0(grid: &Grid, spec: &BoundarySpec) -> f64 {
    let h_max = grid.h().iter().copied().fold(0.0, f64::max);
    let d = spec
        .magnetic_dirichlet_faces()
        .iter()
        .map(|f| grid.lengths()[f.axis()])
        .fold(f64::INFINITY, f64::min);
    if d.is_finite() {
        (0.25 * d).max(4.0 * h_max)
    } else {
        4.0 * h_max
    }
}

/// Cells whose center lies within `delta0` (less half a cell) of a Dirichlet face.
pub fn collar_mask(grid: &Grid, spec: &BoundarySpec, delta0: f64) -> CellMask {
    let faces = spec.magnetic_dirichlet_faces();
    CellMask::from_fn(grid, |idx| {
        let p = grid.position(Stagger::Cell, idx);
        faces.iter().any(|f| {
            let a = f.axis();
            (p[a] - grid.wall(a, f.side())).abs() - 0.5 * grid.h()[a] < delta0
        })
    })
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Cut-off tangential field before the divergence correction.
fn cutoff_field(grid: &Grid, spec: &BoundarySpec, t: f64, delta: f64) -> FaceField {
    let mut w = FaceField::zeros(grid);
    let n = grid.n();
    for f in spec.magnetic_dirichlet_faces() {
        let MagneticBc::TangentialDirichlet(data) = &spec.face(f).magnetic else { continue };
        let a = f.axis();
        let wall = grid.wall(a, f.side());
        let nrm = f.normal();
        for c in 0..3 {
            if c == a {
                continue;
            }
            let arr = &mut w.c[c];
            for idx in arr.indices().collect::<Vec<_>>() {
                if idx[c] == 0 || idx[c] == n[c] {
                    continue;
                }
                let p = grid.position(Stagger::Face(c), idx);
                let d = (p[a] - wall).abs();
                let weight = cell_averaged_cutoff(d, grid.h()[a], delta);
                if weight == 0.0 {
                    continue;
                }
                let mut q = p;
                q[a] = wall;
                let bt = cross(nrm, data.eval(t, q));
                arr.add(idx[0], idx[1], idx[2], weight * bt[c]);
            }
        }
    }
    w
}

/// Divergence-free extension of the tangential data supported in the collar.
pub fn tangential_extension(
    grid: &Grid,
    spec: &BoundarySpec,
    t: f64,
    delta: f64,
    delta0: Option<f64>,
    opts: SolverOptions,
) -> Result<FaceField, EllipticError> {
    let delta0 = delta0.unwrap_or_else(|| default_delta0(grid, spec));
    if !(delta > 0.0) || delta > delta0 * (1.0 + 1e-12) {
        return Err(EllipticError::DeltaOutOfRange { delta, delta0 });
    }
    let mut w = cutoff_field(grid, spec, t, delta);
    if w.max_abs() == 0.0 {
        return Ok(w);
    }
    let f = div(grid, &w)?;
    let mask = collar_mask(grid, spec, delta0);
    for comp in mask.components() {
        let rhs = CellField(crate::grid::Array3::from_fn(grid.n(), |idx| {
            if comp.get(idx) {
                f.get(idx[0], idx[1], idx[2])
            } else {
                0.0
            }
        }));
        if rhs.max_abs() == 0.0 {
            continue;
        }
        let v = bogovskii(grid, &rhs, &comp, opts)?;
        w.axpy(-1.0, &v.field);
    }
    Ok(w)
}

/// Irrotational extension of the normal data: `∇Φ` with `Φ = 0` on Dirichlet faces
/// and `∂Φ/∂n = b_ν` on the others.
pub fn normal_extension(grid: &Grid, spec: &BoundarySpec, t: f64, opts: SolverOptions) -> Result<FaceField, EllipticError> {
    let faces: [FaceCondition; 6] = std::array::from_fn(|i| {
        let f = Face::ALL[i];
        match &spec.face(f).magnetic {
            MagneticBc::TangentialDirichlet(_) => FaceCondition::homogeneous_dirichlet(grid, f),
            MagneticBc::NormalNeumann(d) => {
                FaceCondition::Neumann(face_samples(grid, f).into_iter().map(|p| d.eval(t, p)).collect())
            }
        }
    });
    if faces.iter().all(|f| matches!(f, FaceCondition::Neumann(v) if v.iter().all(|x| *x == 0.0))) {
        return Ok(FaceField::zeros(grid));
    }
    let (phi, _) = poisson_mixed(grid, &CellField::zeros(grid), &faces, opts)?;
    Ok(gradient_with_traces(grid, &phi, &faces))
}

/// Full lifting of the boundary data at time `t` with cutoff width `delta`
/// (`None` selects `δ₀/2`).
pub fn combined_extension(
    grid: &Grid,
    spec: &BoundarySpec,
    t: f64,
    delta: Option<f64>,
    opts: SolverOptions,
) -> Result<ExtensionSet, EllipticError> {
    let delta0 = default_delta0(grid, spec);
    let delta = delta.unwrap_or(0.5 * delta0);
    if !(delta > 0.0) || delta > delta0 * (1.0 + 1e-12) {
        return Err(EllipticError::DeltaOutOfRange { delta, delta0 });
    }
    let theta_tilde = if spec.thermal_dirichlet_faces().is_empty() {
        None
    } else {
        Some(harmonic_extension_temperature(grid, spec, t, opts)?)
    };
    let verdict: StationarityVerdict = stationarity_test(grid, spec, t, opts);
    let (b_normal, b_tangential, stationary) = match verdict.extension {
        Some(ext) if verdict.stationary => (ext, FaceField::zeros(grid), true),
        _ => (
            normal_extension(grid, spec, t, opts)?,
            tangential_extension(grid, spec, t, delta, Some(delta0), opts)?,
            false,
        ),
    };
    let mut b_total = b_normal.clone();
    b_total.axpy(1.0, &b_tangential);
    Ok(ExtensionSet { theta_tilde, b_normal, b_tangential, b_total, delta, delta0, stationary })
}
