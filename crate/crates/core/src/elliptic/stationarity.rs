//! Test for stationary magnetic boundary data: existence of a curl- and
//! divergence-free field with the prescribed traces.

use std::collections::VecDeque;

use serde::Serialize;

use crate::grid::{
    boundary::face_samples, curl_face_to_edge, div, BoundarySpec, CellField, Face, FaceField, Grid, MagneticBc,
};

use super::krylov::SolverOptions;
use super::poisson::{poisson_mixed, FaceCondition};

/// Discrete tangential divergence of `b_τ` at the interior nodes of one face.
#[derive(Clone, Debug, Serialize)]
pub struct FaceDivergence {
    pub face: Face,
    /// Node counts along the two tangential axes (interior nodes only).
    pub dims: [usize; 2],
    pub values: Vec<f64>,
    pub max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityVerdict {
    pub stationary: bool,
    pub max_tangential_divergence: f64,
    pub divergence_tolerance: f64,
    /// Offending (or, when passing, all) tangential divergence fields.
    pub witness: Vec<FaceDivergence>,
    /// Mismatch of surface potentials along shared Dirichlet edges.
    pub alignment_residual: f64,
    /// Max |curl| over interior edges and max |div| over cells of the extension,
    /// relative to the field scale.
    pub curl_residual: f64,
    pub div_residual: f64,
    #[serde(skip)]
    pub extension: Option<FaceField>,
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn point(grid: &Grid, face: Face, b_pos: f64, c_pos: f64) -> [f64; 3] {
    let a = face.axis();
    let (b, c) = Grid::tangential_axes(a);
    let mut p = [0.0; 3];
    p[a] = grid.wall(a, face.side());
    p[b] = grid.origin()[b] + b_pos * grid.h()[b];
    p[c] = grid.origin()[c] + c_pos * grid.h()[c];
    p
}

/// Tangential divergence of `b_τ` at interior face nodes, using `b_τ` sampled at
/// the dual edge midpoints.
pub fn tangential_divergence(grid: &Grid, face: Face, data: &crate::grid::VectorData, t: f64) -> FaceDivergence {
    let a = face.axis();
    let (b, c) = Grid::tangential_axes(a);
    let n = grid.n();
    let h = grid.h();
    let (nb, nc) = (n[b] - 1, n[c] - 1);
    let mut values = Vec::with_capacity(nb * nc);
    for j in 1..n[c] {
        for i in 1..n[b] {
            let bp = data.eval(t, point(grid, face, i as f64 + 0.5, j as f64))[b];
            let bm = data.eval(t, point(grid, face, i as f64 - 0.5, j as f64))[b];
            let cp = data.eval(t, point(grid, face, i as f64, j as f64 + 0.5))[c];
            let cm = data.eval(t, point(grid, face, i as f64, j as f64 - 0.5))[c];
            values.push((bp - bm) / h[b] + (cp - cm) / h[c]);
        }
    }
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    FaceDivergence { face, dims: [nb, nc], values, max_abs }
}

/// Surface potential ψ with ∇_τψ = n × b_τ at interior edges, by path integration;
/// values at face cell centers in the face layout.
fn surface_potential(grid: &Grid, face: Face, data: &crate::grid::VectorData, t: f64) -> Vec<f64> {
    let a = face.axis();
    let (b, c) = Grid::tangential_axes(a);
    let n = grid.n();
    let h = grid.h();
    let nrm = face.normal();
    let v = |bp: f64, cp: f64| cross(nrm, data.eval(t, point(grid, face, bp, cp)));
    let mut psi = vec![0.0; n[b] * n[c]];
    for i in 1..n[b] {
        psi[i] = psi[i - 1] + h[b] * v(i as f64, 0.5)[b];
    }
    for j in 1..n[c] {
        for i in 0..n[b] {
            psi[i + n[b] * j] = psi[i + n[b] * (j - 1)] + h[c] * v(i as f64 + 0.5, j as f64)[c];
        }
    }
    psi
}

/// ψ extrapolated to the rim shared with `other` (perpendicular face), indexed by the
/// cell index along the shared edge.
fn rim_values(grid: &Grid, face: Face, other: Face, psi: &[f64], data: &crate::grid::VectorData, t: f64) -> Vec<f64> {
    let a = face.axis();
    let (b, c) = Grid::tangential_axes(a);
    let n = grid.n();
    let h = grid.h();
    let toward = other.axis();
    let along = if toward == b { c } else { b };
    let nrm = face.normal();
    let hi = other.side() == 1;
    let mut out = Vec::with_capacity(n[along]);
    for s in 0..n[along] {
        let rim_idx = if hi { n[toward] - 1 } else { 0 };
        let (ib, ic) = if toward == b { (rim_idx, s) } else { (s, rim_idx) };
        let base = psi[ib + n[b] * ic];
        let wall_pos = if hi { n[toward] as f64 } else { 0.0 };
        let (bp, cp) = if toward == b { (wall_pos, s as f64 + 0.5) } else { (s as f64 + 0.5, wall_pos) };
        let vt = cross(nrm, data.eval(t, point(grid, face, bp, cp)))[toward];
        let sign = if hi { 1.0 } else { -1.0 };
        out.push(base + sign * 0.5 * h[toward] * vt);
    }
    out
}

pub fn stationarity_test(grid: &Grid, spec: &BoundarySpec, t: f64, opts: SolverOptions) -> StationarityVerdict {
    let h_min = grid.h().iter().copied().fold(f64::INFINITY, f64::min);
    let dirichlet = spec.magnetic_dirichlet_faces();
    let mut witness = Vec::new();
    let mut scale = 0.0_f64;
    for f in Face::ALL {
        match &spec.face(f).magnetic {
            MagneticBc::TangentialDirichlet(d) => {
                for p in face_samples(grid, f) {
                    scale = scale.max(d.eval(t, p).iter().fold(0.0_f64, |m, v| m.max(v.abs())));
                }
            }
            MagneticBc::NormalNeumann(d) => {
                for p in face_samples(grid, f) {
                    scale = scale.max(d.eval(t, p).abs());
                }
            }
        }
    }
    let tol = 1e-8 * scale / h_min + 1e-12;
    let mut max_div = 0.0_f64;
    for &f in &dirichlet {
        if let MagneticBc::TangentialDirichlet(d) = &spec.face(f).magnetic {
            let fd = tangential_divergence(grid, f, d, t);
            max_div = max_div.max(fd.max_abs);
            witness.push(fd);
        }
    }
    let failing = StationarityVerdict {
        stationary: false,
        max_tangential_divergence: max_div,
        divergence_tolerance: tol,
        witness: Vec::new(),
        alignment_residual: 0.0,
        curl_residual: f64::NAN,
        div_residual: f64::NAN,
        extension: None,
    };
    if max_div > tol {
        let witness = witness.into_iter().filter(|w| w.max_abs > tol).collect();
        return StationarityVerdict { witness, ..failing };
    }

    // Surface potentials and constant alignment across shared edges.
    let mut psi: Vec<Option<Vec<f64>>> = vec![None; 6];
    for &f in &dirichlet {
        if let MagneticBc::TangentialDirichlet(d) = &spec.face(f).magnetic {
            psi[f.index()] = Some(surface_potential(grid, f, d, t));
        }
    }
    let adjacent = |f: Face, g: Face| f.axis() != g.axis();
    let data_of = |f: Face| match &spec.face(f).magnetic {
        MagneticBc::TangentialDirichlet(d) => d.clone(),
        MagneticBc::NormalNeumann(_) => unreachable!("only Dirichlet faces carry potentials"),
    };
    let mut offset = [f64::NAN; 6];
    for &start in &dirichlet {
        if !offset[start.index()].is_nan() {
            continue;
        }
        offset[start.index()] = 0.0;
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            for &g in &dirichlet {
                if !adjacent(f, g) || !offset[g.index()].is_nan() {
                    continue;
                }
                let rf = rim_values(grid, f, g, psi[f.index()].as_ref().unwrap(), &data_of(f), t);
                let rg = rim_values(grid, g, f, psi[g.index()].as_ref().unwrap(), &data_of(g), t);
                let mean = rf.iter().zip(&rg).map(|(x, y)| x + offset[f.index()] - y).sum::<f64>() / rf.len() as f64;
                offset[g.index()] = mean;
                queue.push_back(g);
            }
        }
    }
    let mut alignment = 0.0_f64;
    for &f in &dirichlet {
        for &g in &dirichlet {
            if f < g && adjacent(f, g) {
                let rf = rim_values(grid, f, g, psi[f.index()].as_ref().unwrap(), &data_of(f), t);
                let rg = rim_values(grid, g, f, psi[g.index()].as_ref().unwrap(), &data_of(g), t);
                for (x, y) in rf.iter().zip(&rg) {
                    alignment = alignment.max((x + offset[f.index()] - y - offset[g.index()]).abs());
                }
            }
        }
    }
    let length = grid.lengths().iter().copied().fold(0.0, f64::max);
    let align_tol = 1e-8 * scale * length + 1e-12;
    if alignment > align_tol {
        return StationarityVerdict { witness, alignment_residual: alignment, ..failing };
    }

    let faces: [FaceCondition; 6] = std::array::from_fn(|i| {
        let f = Face::ALL[i];
        match &spec.face(f).magnetic {
            MagneticBc::TangentialDirichlet(_) => FaceCondition::Dirichlet(
                psi[i].as_ref().unwrap().iter().map(|v| v + offset[i]).collect(),
            ),
            MagneticBc::NormalNeumann(d) => {
                FaceCondition::Neumann(face_samples(grid, f).into_iter().map(|p| d.eval(t, p)).collect())
            }
        }
    });
    let phi = match poisson_mixed(grid, &CellField::zeros(grid), &faces, opts) {
        Ok((phi, _)) => phi,
        Err(_) => return StationarityVerdict { witness, alignment_residual: alignment, ..failing },
    };
    let ext = gradient_with_traces(grid, &phi, &faces);
    let field_scale = ext.max_abs().max(1e-300);
    let curl = curl_face_to_edge(grid, &ext).expect("grid-shaped").max_abs() / field_scale;
    let dv = div(grid, &ext).expect("grid-shaped").max_abs() * h_min / field_scale;
    StationarityVerdict {
        stationary: true,
        max_tangential_divergence: max_div,
        divergence_tolerance: tol,
        witness,
        alignment_residual: alignment,
        curl_residual: curl,
        div_residual: dv,
        extension: Some(ext),
    }
}

/// Face gradient of a cell potential, with boundary normals taken from the face
/// conditions used to compute it.
pub(crate) fn gradient_with_traces(grid: &Grid, phi: &CellField, faces: &[FaceCondition; 6]) -> FaceField {
    let mut g = crate::grid::grad(grid, phi).expect("grid-shaped");
    let n = grid.n();
    let h = grid.h();
    for f in Face::ALL {
        let a = f.axis();
        let (tb, tc) = Grid::tangential_axes(a);
        let cell = if f.side() == 0 { 0 } else { n[a] - 1 };
        let fidx = if f.side() == 0 { 0 } else { n[a] };
        for jc in 0..n[tc] {
            for jb in 0..n[tb] {
                let slot = jb + n[tb] * jc;
                let mut ci = [0; 3];
                ci[a] = cell;
                ci[tb] = jb;
                ci[tc] = jc;
                let mut fi = ci;
                fi[a] = fidx;
                let inner = phi.get(ci[0], ci[1], ci[2]);
                let v = match &faces[f.index()] {
                    FaceCondition::Dirichlet(vals) => f.sign() * 2.0 * (vals[slot] - inner) / h[a],
                    FaceCondition::Neumann(vals) => f.sign() * vals[slot],
                };
                g.c[a].set(fi[0], fi[1], fi[2], v);
            }
        }
    }
    g
}
