//! Right inverse of the divergence with zero boundary values on a cell mask,
//! realised through a discrete Stokes problem
//! `−Δv + ∇q = 0`, `div v = f`, `v = 0` on the mask boundary.

use std::collections::VecDeque;

use crate::grid::{face_weight, Array3, CellField, FaceField, Grid, Stagger};

use super::krylov::{minres, SolveStats, SolverOptions};
use super::EllipticError;

/// Boolean mask over cells, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMask {
    pub n: [usize; 3],
    pub cells: Vec<bool>,
}

impl CellMask {
    pub fn full(grid: &Grid) -> Self {
        CellMask { n: grid.n(), cells: vec![true; grid.cell_count()] }
    }
    pub fn from_fn(grid: &Grid, f: impl Fn([usize; 3]) -> bool) -> Self {
        let n = grid.n();
        let mut cells = Vec::with_capacity(grid.cell_count());
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    cells.push(f([i, j, k]));
                }
            }
        }
        CellMask { n, cells }
    }
    #[inline]
    pub fn get(&self, idx: [usize; 3]) -> bool {
        self.cells[idx[0] + self.n[0] * (idx[1] + self.n[1] * idx[2])]
    }
    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    /// Split into 6-connected components.
    pub fn components(&self) -> Vec<CellMask> {
        let n = self.n;
        let mut label = vec![usize::MAX; self.cells.len()];
        let mut comps = Vec::new();
        for start in 0..self.cells.len() {
            if !self.cells[start] || label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut cells = vec![false; self.cells.len()];
            let mut queue = VecDeque::from([start]);
            label[start] = id;
            while let Some(c) = queue.pop_front() {
                cells[c] = true;
                let idx = [c % n[0], (c / n[0]) % n[1], c / (n[0] * n[1])];
                for a in 0..3 {
                    for dir in [-1isize, 1] {
                        let p = idx[a] as isize + dir;
                        if p < 0 || p >= n[a] as isize {
                            continue;
                        }
                        let mut nb = idx;
                        nb[a] = p as usize;
                        let m = nb[0] + n[0] * (nb[1] + n[1] * nb[2]);
                        if self.cells[m] && label[m] == usize::MAX {
                            label[m] = id;
                            queue.push_back(m);
                        }
                    }
                }
            }
            comps.push(CellMask { n, cells });
        }
        comps
    }
}

#[derive(Clone, Debug)]
pub struct BogovskiiResult {
    pub field: FaceField,
    /// Measured `‖v‖_{H¹} / ‖f‖_{L²}`.
    pub constant: f64,
    pub stats: SolveStats,
}

/// Indexing of the discrete Stokes unknowns on a mask.
pub(crate) struct StokesLayout {
    pub n: [usize; 3],
    pub ih2: [f64; 3],
    pub ih: [f64; 3],
    /// Per component, face linear index → unknown index (or `usize::MAX`).
    pub face_map: [Vec<usize>; 3],
    pub face_dims: [[usize; 3]; 3],
    /// Unknown index → (component, face multi-index).
    pub faces: Vec<(usize, [usize; 3])>,
    /// Masked cell linear indices, in order.
    pub cells: Vec<usize>,
}

impl StokesLayout {
    pub(crate) fn new(grid: &Grid, mask: &CellMask) -> Self {
        let n = grid.n();
        let h = grid.h();
        let face_dims = [0, 1, 2].map(|a| grid.dims(Stagger::Face(a)));
        let mut faces = Vec::new();
        let face_map = [0, 1, 2].map(|a| {
            let d = face_dims[a];
            let mut map = vec![usize::MAX; d[0] * d[1] * d[2]];
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let idx = [i, j, k];
                        if idx[a] == 0 || idx[a] == n[a] {
                            continue;
                        }
                        let mut lo = idx;
                        lo[a] -= 1;
                        if mask.get(lo) && mask.get(idx) {
                            map[i + d[0] * (j + d[1] * k)] = faces.len();
                            faces.push((a, idx));
                        }
                    }
                }
            }
            map
        });
        let cells: Vec<usize> = mask.cells.iter().enumerate().filter(|(_, m)| **m).map(|(c, _)| c).collect();
        StokesLayout { n, ih2: h.map(|v| 1.0 / (v * v)), ih: h.map(|v| 1.0 / v), face_map, face_dims, faces, cells }
    }

    pub(crate) fn nv(&self) -> usize {
        self.faces.len()
    }
    pub(crate) fn nq(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    fn unknown(&self, a: usize, idx: [isize; 3]) -> Option<usize> {
        let d = self.face_dims[a];
        if (0..3).any(|b| idx[b] < 0 || idx[b] >= d[b] as isize) {
            return None;
        }
        let m = self.face_map[a][idx[0] as usize + d[0] * (idx[1] as usize + d[1] * idx[2] as usize)];
        (m != usize::MAX).then_some(m)
    }

    /// Neighbours of unknown `u` for the vector Laplacian: (coefficient, neighbour or
    /// `None` meaning the reflected ghost `−v_u`).
    pub(crate) fn laplace_row(&self, u: usize) -> (f64, Vec<(f64, usize)>) {
        let (a, idx) = self.faces[u];
        let mut diag = 0.0;
        let mut off = Vec::with_capacity(6);
        for d in 0..3 {
            for dir in [-1isize, 1] {
                let mut p = idx.map(|v| v as isize);
                p[d] += dir;
                let w = self.ih2[d];
                diag += w;
                match self.unknown(a, p) {
                    Some(m) => off.push((-w, m)),
                    None if d == a => {}
                    // Wall half a cell away: ghost = −v.
                    None => diag += w,
                }
            }
        }
        (diag, off)
    }

    /// `(D v)_c` contributions: (coefficient, unknown) for masked cell number `q`.
    pub(crate) fn div_row(&self, q: usize) -> Vec<(f64, usize)> {
        let c = self.cells[q];
        let n = self.n;
        let idx = [c % n[0], (c / n[0]) % n[1], c / (n[0] * n[1])];
        let mut row = Vec::with_capacity(6);
        for a in 0..3 {
            let lo = idx.map(|v| v as isize);
            let mut hi = lo;
            hi[a] += 1;
            if let Some(m) = self.unknown(a, hi) {
                row.push((self.ih[a], m));
            }
            if let Some(m) = self.unknown(a, lo) {
                row.push((-self.ih[a], m));
            }
        }
        row
    }
}

/// Solve `div v = f` on `mask` with `v = 0` on and outside the mask boundary.
pub fn bogovskii(grid: &Grid, f: &CellField, mask: &CellMask, opts: SolverOptions) -> Result<BogovskiiResult, EllipticError> {
    if mask.n != grid.n() {
        return Err(EllipticError::BadInput("mask does not match grid".into()));
    }
    let comps = mask.components();
    if comps.len() != 1 {
        return Err(EllipticError::DisconnectedMask { components: comps.len() });
    }
    let vol = grid.cell_volume();
    let (mut sum, mut abs) = (0.0, 0.0);
    for (c, m) in mask.cells.iter().enumerate() {
        if *m {
            sum += f.data()[c];
            abs += f.data()[c].abs();
        } else if f.data()[c] != 0.0 {
            return Err(EllipticError::BadInput("right-hand side nonzero outside the mask".into()));
        }
    }
    if sum.abs() > 1e-10 * abs.max(1e-300) && sum.abs() * vol > 1e-15 {
        return Err(EllipticError::NonzeroMean { mean: sum * vol });
    }
    if abs == 0.0 {
        return Ok(BogovskiiResult {
            field: FaceField::zeros(grid),
            constant: 0.0,
            stats: SolveStats { iterations: 0, residual: 0.0, history: vec![] },
        });
    }
    let lay = StokesLayout::new(grid, mask);
    let (nv, nq) = (lay.nv(), lay.nq());
    if nv == 0 {
        return Err(EllipticError::BadInput("mask has no interior faces".into()));
    }
    let lap: Vec<(f64, Vec<(f64, usize)>)> = (0..nv).map(|u| lay.laplace_row(u)).collect();
    let divs: Vec<Vec<(f64, usize)>> = (0..nq).map(|q| lay.div_row(q)).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        let (v, q) = x.split_at(nv);
        let (yv, yq) = y.split_at_mut(nv);
        for u in 0..nv {
            let (d, off) = &lap[u];
            let mut acc = d * v[u];
            for (w, m) in off {
                acc += w * v[*m];
            }
            yv[u] = acc;
        }
        for (c, row) in divs.iter().enumerate() {
            let mut acc = 0.0;
            for (w, m) in row {
                acc += w * v[*m];
                // −Dᵀ q in the velocity rows.
                yv[*m] -= w * q[c];
            }
            yq[c] = -acc;
        }
    };
    let mut diag = Vec::with_capacity(nv + nq);
    diag.extend(lap.iter().map(|(d, _)| *d));
    diag.extend(std::iter::repeat_n(1.0, nq));
    let mut b = vec![0.0; nv + nq];
    for (q, &c) in lay.cells.iter().enumerate() {
        b[nv + q] = -f.data()[c];
    }
    let mut x = vec![0.0; nv + nq];
    let stats = minres(apply, &diag, &b, &mut x, SolverOptions { tol: opts.tol.min(1e-11), ..opts })?;

    let mut field = FaceField::zeros(grid);
    for (u, (a, idx)) in lay.faces.iter().enumerate() {
        field.c[*a].set(idx[0], idx[1], idx[2], x[u]);
    }
    let constant = h1_norm(grid, &field) / (f.data().iter().map(|v| v * v).sum::<f64>() * vol).sqrt();
    Ok(BogovskiiResult { field, constant, stats })
}

/// Discrete `‖v‖_{H¹}`: L² part plus differences between neighbouring entries of
/// each component array.
pub fn h1_norm(grid: &Grid, v: &FaceField) -> f64 {
    let vol = grid.cell_volume();
    let h = grid.h();
    let mut s = 0.0;
    for a in 0..3 {
        let arr: &Array3 = &v.c[a];
        let d = arr.dims();
        for idx in arr.indices() {
            let val = arr.get(idx[0], idx[1], idx[2]);
            s += face_weight(grid, a, idx[a]) * val * val;
            for b in 0..3 {
                if idx[b] + 1 < d[b] {
                    let mut nb = idx;
                    nb[b] += 1;
                    let g = (arr.get(nb[0], nb[1], nb[2]) - val) / h[b];
                    s += vol * g * g;
                }
            }
        }
    }
    s.sqrt()
}
