//! Row-list sparse matrices for the magnetic operators with homogeneous
//! boundary conditions.

use crate::grid::{face_weight, BoundarySpec, Face, FaceField, Grid, Stagger};

#[derive(Clone, Debug, Default)]
pub(crate) struct SparseRows {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub ncols: usize,
}

impl SparseRows {
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            y[r] = row.iter().map(|(c, w)| w * x[*c]).sum();
        }
    }
    pub fn mul_t_add(&self, y: &[f64], x: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            for (c, w) in row {
                x[*c] += w * y[r];
            }
        }
    }
    /// Diagonal of `AᵀA`.
    pub fn normal_diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.ncols];
        for row in &self.rows {
            for (c, w) in row {
                d[*c] += w * w;
            }
        }
        d
    }
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }
}

/// Flat indexing of face fields (component-major, matching `FaceField::to_vec`).
pub(crate) struct FaceIndex {
    dims: [[usize; 3]; 3],
    offsets: [usize; 3],
    pub len: usize,
}

impl FaceIndex {
    pub fn new(grid: &Grid) -> Self {
        let dims = [0, 1, 2].map(|a| grid.dims(Stagger::Face(a)));
        let sizes = dims.map(|d| d[0] * d[1] * d[2]);
        FaceIndex { dims, offsets: [0, sizes[0], sizes[0] + sizes[1]], len: sizes.iter().sum() }
    }
    #[inline]
    pub fn at(&self, a: usize, idx: [usize; 3]) -> usize {
        let d = self.dims[a];
        self.offsets[a] + idx[0] + d[0] * (idx[1] + d[1] * idx[2])
    }
    pub fn dims(&self, a: usize) -> [usize; 3] {
        self.dims[a]
    }
}

/// Discrete div, curl and H¹-difference operators on magnetic fields satisfying the
/// homogeneous conditions of `spec` (zero normal on normal-tagged faces, zero
/// tangential trace on tangential-tagged faces via reflected ghosts).
pub(crate) struct MagneticOperators {
    pub index: FaceIndex,
    /// Entries that are free (not pinned to zero by a normal condition).
    pub free: Vec<bool>,
    pub div: SparseRows,
    pub curl: SparseRows,
    pub diff: SparseRows,
    pub weights: Vec<f64>,
    pub vol: f64,
}

impl MagneticOperators {
    pub fn new(grid: &Grid, spec: &BoundarySpec) -> Self {
        let n = grid.n();
        let h = grid.h();
        let index = FaceIndex::new(grid);
        let dirichlet: [bool; 6] = std::array::from_fn(|i| spec.face(Face::ALL[i]).magnetic.is_dirichlet());
        let mut free = vec![true; index.len];
        let mut weights = vec![0.0; index.len];
        for a in 0..3 {
            let d = index.dims(a);
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let idx = [i, j, k];
                        let m = index.at(a, idx);
                        weights[m] = face_weight(grid, a, idx[a]);
                        if (idx[a] == 0 && !dirichlet[2 * a]) || (idx[a] == n[a] && !dirichlet[2 * a + 1]) {
                            free[m] = false;
                        }
                    }
                }
            }
        }
        let push = |row: &mut Vec<(usize, f64)>, m: usize, w: f64, free: &[bool]| {
            if free[m] {
                row.push((m, w));
            }
        };

        let mut div_rows = Vec::with_capacity(grid.cell_count());
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let mut row = Vec::with_capacity(6);
                    for a in 0..3 {
                        let lo = [i, j, k];
                        let mut hi = lo;
                        hi[a] += 1;
                        push(&mut row, index.at(a, hi), 1.0 / h[a], &free);
                        push(&mut row, index.at(a, lo), -1.0 / h[a], &free);
                    }
                    div_rows.push(row);
                }
            }
        }

        // Curl at edges. Component `e` edge at multi-index `idx`; term ∂_p B_q with
        // (e, p, q) cyclic minus ∂_q B_p.
        let mut curl_rows = Vec::new();
        for e in 0..3 {
            let (p, q) = ((e + 1) % 3, (e + 2) % 3);
            let d = grid.dims(Stagger::Edge(e));
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let idx = [i, j, k];
                        let mut row: Vec<(usize, f64)> = Vec::with_capacity(4);
                        let mut ok = true;
                        // (+) ∂_p B_q: B_q at cell-centered p-index idx[p]-1 and idx[p].
                        // (−) ∂_q B_p: B_p at cell-centered q-index idx[q]-1 and idx[q].
                        for (comp, axis, sign) in [(q, p, 1.0), (p, q, -1.0)] {
                            for (off, s) in [(0isize, 1.0), (-1isize, -1.0)] {
                                let pos = idx[axis] as isize + off;
                                let w = sign * s / h[axis];
                                let mut src = idx;
                                if pos < 0 || pos >= n[axis] as isize {
                                    let side = if pos < 0 { 0 } else { 1 };
                                    if !dirichlet[2 * axis + side] {
                                        ok = false;
                                        break;
                                    }
                                    // Reflected ghost: value = −mirror.
                                    src[axis] = if pos < 0 { 0 } else { n[axis] - 1 };
                                    push(&mut row, index.at(comp, src), -w, &free);
                                } else {
                                    src[axis] = pos as usize;
                                    push(&mut row, index.at(comp, src), w, &free);
                                }
                            }
                            if !ok {
                                break;
                            }
                        }
                        if ok {
                            curl_rows.push(merge(row));
                        }
                    }
                }
            }
        }

        let mut diff_rows = Vec::new();
        for a in 0..3 {
            let d = index.dims(a);
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let idx = [i, j, k];
                        for b in 0..3 {
                            if idx[b] + 1 < d[b] {
                                let mut nb = idx;
                                nb[b] += 1;
                                let mut row = Vec::with_capacity(2);
                                push(&mut row, index.at(a, nb), 1.0 / h[b], &free);
                                push(&mut row, index.at(a, idx), -1.0 / h[b], &free);
                                diff_rows.push(row);
                            }
                        }
                    }
                }
            }
        }
        let len = index.len;
        MagneticOperators {
            index,
            free,
            div: SparseRows { rows: div_rows, ncols: len },
            curl: SparseRows { rows: curl_rows, ncols: len },
            diff: SparseRows { rows: diff_rows, ncols: len },
            weights,
            vol: grid.cell_volume(),
        }
    }

    pub fn pin(&self, x: &mut [f64]) {
        for (v, f) in x.iter_mut().zip(&self.free) {
            if !f {
                *v = 0.0;
            }
        }
    }

    pub fn to_field(&self, grid: &Grid, x: &[f64]) -> FaceField {
        FaceField::from_flat(grid, x)
    }

    pub fn weighted_dot(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }
}

fn merge(mut row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (c, w) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += w,
            _ => out.push((c, w)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}
