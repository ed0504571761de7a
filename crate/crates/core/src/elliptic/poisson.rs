//! 7-point Poisson problems with face-wise Dirichlet/Neumann data.

use crate::grid::{boundary::face_samples, Array3, BoundarySpec, CellField, Face, Grid, ThermalBc};

use super::krylov::{pcg, SolveStats, SolverOptions};
use super::EllipticError;

/// Data on one box face, sampled at the centers of the face's cells
/// (first tangential axis fastest).
#[derive(Clone, Debug)]
pub enum FaceCondition {
    /// Prescribed value on the wall.
    Dirichlet(Vec<f64>),
    /// Prescribed outward normal derivative.
    Neumann(Vec<f64>),
}

impl FaceCondition {
    pub fn homogeneous_dirichlet(grid: &Grid, face: Face) -> Self {
        FaceCondition::Dirichlet(vec![0.0; face_len(grid, face)])
    }
    pub fn homogeneous_neumann(grid: &Grid, face: Face) -> Self {
        FaceCondition::Neumann(vec![0.0; face_len(grid, face)])
    }
    fn is_dirichlet(&self) -> bool {
        matches!(self, FaceCondition::Dirichlet(_))
    }
    fn values(&self) -> &[f64] {
        match self {
            FaceCondition::Dirichlet(v) | FaceCondition::Neumann(v) => v,
        }
    }
}

pub(crate) fn face_len(grid: &Grid, face: Face) -> usize {
    let (b, c) = Grid::tangential_axes(face.axis());
    grid.n()[b] * grid.n()[c]
}

/// Discrete `−Δ` with homogeneous versions of the face conditions.
pub(crate) struct NegLaplacian {
    n: [usize; 3],
    ih2: [f64; 3],
    dirichlet: [bool; 6],
}

impl NegLaplacian {
    pub(crate) fn new(grid: &Grid, dirichlet: [bool; 6]) -> Self {
        let h = grid.h();
        NegLaplacian { n: grid.n(), ih2: h.map(|v| 1.0 / (v * v)), dirichlet }
    }

    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        let [nx, ny, nz] = self.n;
        let sx = 1;
        let sy = nx;
        let sz = nx * ny;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let c = i + nx * (j + ny * k);
                    let xc = x[c];
                    let mut acc = 0.0;
                    for (a, (pos, len, stride)) in [(i, nx, sx), (j, ny, sy), (k, nz, sz)].into_iter().enumerate() {
                        let w = self.ih2[a];
                        if pos > 0 {
                            acc += w * (xc - x[c - stride]);
                        } else if self.dirichlet[2 * a] {
                            acc += 2.0 * w * xc;
                        }
                        if pos + 1 < len {
                            acc += w * (xc - x[c + stride]);
                        } else if self.dirichlet[2 * a + 1] {
                            acc += 2.0 * w * xc;
                        }
                    }
                    y[c] = acc;
                }
            }
        }
    }

    pub(crate) fn diagonal(&self) -> Vec<f64> {
        let [nx, ny, nz] = self.n;
        let mut d = vec![0.0; nx * ny * nz];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let c = i + nx * (j + ny * k);
                    let mut acc = 0.0;
                    for (a, (pos, len)) in [(i, nx), (j, ny), (k, nz)].into_iter().enumerate() {
                        let w = self.ih2[a];
                        acc += if pos > 0 { w } else if self.dirichlet[2 * a] { 2.0 * w } else { 0.0 };
                        acc += if pos + 1 < len { w } else if self.dirichlet[2 * a + 1] { 2.0 * w } else { 0.0 };
                    }
                    d[c] = acc;
                }
            }
        }
        d
    }
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Solve `Δφ = rhs` with the given face conditions. Pure-Neumann problems must be
/// compatible and are normalised to zero mean.
pub fn poisson_mixed(
    grid: &Grid,
    rhs: &CellField,
    faces: &[FaceCondition; 6],
    opts: SolverOptions,
) -> Result<(CellField, SolveStats), EllipticError> {
    let n = grid.n();
    let h = grid.h();
    for f in Face::ALL {
        if faces[f.index()].values().len() != face_len(grid, f) {
            return Err(EllipticError::BadInput(format!("face {f} data has wrong length")));
        }
    }
    let dirichlet: [bool; 6] = std::array::from_fn(|i| faces[i].is_dirichlet());
    let op = NegLaplacian::new(grid, dirichlet);
    let mut b: Vec<f64> = rhs.data().iter().map(|v| -v).collect();
    let lin = |i: usize, j: usize, k: usize| i + n[0] * (j + n[1] * k);
    for f in Face::ALL {
        let a = f.axis();
        let (tb, tc) = Grid::tangential_axes(a);
        let pos = if f.side() == 0 { 0 } else { n[a] - 1 };
        let vals = faces[f.index()].values();
        for jc in 0..n[tc] {
            for jb in 0..n[tb] {
                let mut idx = [0; 3];
                idx[a] = pos;
                idx[tb] = jb;
                idx[tc] = jc;
                let g = vals[jb + n[tb] * jc];
                let c = lin(idx[0], idx[1], idx[2]);
                b[c] += match faces[f.index()] {
                    FaceCondition::Dirichlet(_) => 2.0 * g / (h[a] * h[a]),
                    FaceCondition::Neumann(_) => g / h[a],
                };
            }
        }
    }
    let pure_neumann = !dirichlet.iter().any(|d| *d);
    if pure_neumann {
        let total: f64 = b.iter().sum();
        let scale: f64 = b.iter().map(|v| v.abs()).sum();
        let vol = grid.cell_volume();
        if total.abs() > 1e-10 * scale.max(1e-300) && total.abs() * vol > 1e-14 {
            return Err(EllipticError::Incompatible { defect: total * vol });
        }
    }
    let diag = op.diagonal();
    let mut x = vec![0.0; b.len()];
    let proj: &dyn Fn(&mut [f64]) = &remove_mean;
    let stats = pcg(
        |x, y| op.apply(x, y),
        &diag,
        &b,
        &mut x,
        opts,
        if pure_neumann { Some(proj) } else { None },
    )?;
    Ok((CellField(Array3::from_vec(n, x).expect("sized")), stats))
}

/// Harmonic extension of the boundary temperature at time `t`: Dirichlet on
/// Dirichlet-tagged faces, zero flux elsewhere.
pub fn harmonic_extension_temperature(
    grid: &Grid,
    spec: &BoundarySpec,
    t: f64,
    opts: SolverOptions,
) -> Result<CellField, EllipticError> {
    if spec.thermal_dirichlet_faces().is_empty() {
        return Err(EllipticError::NoDirichletTemperature);
    }
    let faces: [FaceCondition; 6] = std::array::from_fn(|i| {
        let f = Face::ALL[i];
        match &spec.face(f).thermal {
            ThermalBc::Dirichlet(d) => {
                FaceCondition::Dirichlet(face_samples(grid, f).into_iter().map(|p| d.eval(t, p)).collect())
            }
            _ => FaceCondition::homogeneous_neumann(grid, f),
        }
    });
    let (phi, _) = poisson_mixed(grid, &CellField::zeros(grid), &faces, opts)?;
    Ok(phi)
}
