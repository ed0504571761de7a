//! Dense linear-algebra oracles shared by the integration tests.
#![allow(dead_code)]

use mhd_core::grid::{CellField, Face, FaceField, Grid, Stagger};
use mhd_core::elliptic::FaceCondition;
use nalgebra::{DMatrix, DVector};

pub fn face_len(g: &Grid, f: Face) -> usize {
    let (b, c) = Grid::tangential_axes(f.axis());
    g.n()[b] * g.n()[c]
}

pub fn lin(n: [usize; 3], i: [usize; 3]) -> usize {
    i[0] + n[0] * (i[1] + n[1] * i[2])
}

/// Dense cell-centred 7-point Laplacian with wall data entering through ghost
/// cells; returns `(A, b)` with `A φ = b`.
pub fn dense_poisson(g: &Grid, rhs: &CellField, faces: &[FaceCondition; 6]) -> (DMatrix<f64>, DVector<f64>) {
    let n = g.n();
    let h = g.h();
    let m = g.cell_count();
    let mut a = DMatrix::zeros(m, m);
    let mut b = DVector::from_iterator(m, rhs.data().iter().copied());
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let idx = [i, j, k];
                let r = lin(n, idx);
                for ax in 0..3 {
                    let w = 1.0 / (h[ax] * h[ax]);
                    for side in 0..2 {
                        let inside = if side == 0 { idx[ax] > 0 } else { idx[ax] + 1 < n[ax] };
                        if inside {
                            let mut nb = idx;
                            if side == 0 {
                                nb[ax] -= 1
                            } else {
                                nb[ax] += 1
                            }
                            a[(r, r)] -= w;
                            a[(r, lin(n, nb))] += w;
                            continue;
                        }
                        let f = Face::new(ax, side);
                        let (tb, tc) = Grid::tangential_axes(ax);
                        let pos = idx[tb] + n[tb] * idx[tc];
                        match &faces[f.index()] {
                            // ghost = 2g − φ
                            FaceCondition::Dirichlet(v) => {
                                a[(r, r)] -= 2.0 * w;
                                b[r] -= 2.0 * v[pos] * w;
                            }
                            // ghost = φ + h g
                            FaceCondition::Neumann(v) => b[r] -= v[pos] / h[ax],
                        }
                    }
                }
            }
        }
    }
    (a, b)
}

/// Dense Stokes solve for `div v = f` with `v = 0` on the walls, as the minimiser
/// of the discrete Dirichlet energy under the divergence constraint.
pub fn dense_bogovskii(g: &Grid, f: &CellField) -> FaceField {
    let n = g.n();
    let h = g.h();
    let mut unknowns: Vec<(usize, [usize; 3])> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for a in 0..3 {
        let d = g.dims(Stagger::Face(a));
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let idx = [i, j, k];
                    if idx[a] > 0 && idx[a] < n[a] {
                        index.insert((a, idx), unknowns.len());
                        unknowns.push((a, idx));
                    }
                }
            }
        }
    }
    let nv = unknowns.len();
    let nq = g.cell_count();
    let size = nv + nq + 1;
    let mut k = DMatrix::zeros(size, size);
    for (u, &(a, idx)) in unknowns.iter().enumerate() {
        for d in 0..3 {
            let w = 1.0 / (h[d] * h[d]);
            for step in [-1isize, 1] {
                let p = idx[d] as isize + step;
                let mut nb = idx;
                let exists = p >= 0 && (p as usize) < g.dims(Stagger::Face(a))[d];
                if exists {
                    nb[d] = p as usize;
                }
                match index.get(&(a, nb)).filter(|_| exists) {
                    Some(&m) => {
                        k[(u, u)] += w;
                        k[(u, m)] -= w;
                    }
                    // Wall value zero.
                    None if d == a => k[(u, u)] += w,
                    // Wall half a cell away: mirrored ghost.
                    None => k[(u, u)] += 2.0 * w,
                }
            }
        }
    }
    for kk in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let c = lin(n, [i, j, kk]);
                for a in 0..3 {
                    let mut hi = [i, j, kk];
                    hi[a] += 1;
                    for (idx, s) in [([i, j, kk], -1.0), (hi, 1.0)] {
                        if let Some(&m) = index.get(&(a, idx)) {
                            k[(nv + c, m)] += s / h[a];
                            k[(m, nv + c)] += s / h[a];
                        }
                    }
                }
                k[(nv + c, size - 1)] = 1.0;
                k[(size - 1, nv + c)] = 1.0;
            }
        }
    }
    let mut rhs = DVector::zeros(size);
    for c in 0..nq {
        rhs[nv + c] = f.data()[c];
    }
    let x = k.lu().solve(&rhs).expect("nonsingular bordered system");
    let mut v = FaceField::zeros(g);
    for (u, &(a, idx)) in unknowns.iter().enumerate() {
        v.c[a].set(idx[0], idx[1], idx[2], x[u]);
    }
    v
}

/// Dense oracle for `‖f‖²_{H¹}` of a face field: explicit L² weights and a
/// difference matrix assembled entry by entry.
pub fn dense_face_h1_sq(g: &Grid, f: &FaceField) -> f64 {
    let x = DVector::from_vec(f.to_vec());
    let n = g.n();
    let h = g.h();
    let v = g.cell_volume();
    let mut offsets = [0usize; 3];
    let mut dims = [[0usize; 3]; 3];
    let mut total = 0;
    for a in 0..3 {
        offsets[a] = total;
        dims[a] = f.c[a].dims();
        total += dims[a].iter().product::<usize>();
    }
    let lin = |a: usize, i: [usize; 3]| offsets[a] + i[0] + dims[a][0] * (i[1] + dims[a][1] * i[2]);
    let mut weights = DVector::zeros(total);
    let mut rows = Vec::new();
    for a in 0..3 {
        let d = dims[a];
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let idx = [i, j, k];
                    let wall = idx[a] == 0 || idx[a] == n[a];
                    weights[lin(a, idx)] = if wall { 0.5 * v } else { v };
                    for b in 0..3 {
                        if idx[b] + 1 < d[b] {
                            let mut nb = idx;
                            nb[b] += 1;
                            rows.push((lin(a, nb), lin(a, idx), 1.0 / h[b]));
                        }
                    }
                }
            }
        }
    }
    let mut dmat = DMatrix::zeros(rows.len(), total);
    for (r, &(p, m, s)) in rows.iter().enumerate() {
        dmat[(r, p)] = s;
        dmat[(r, m)] = -s;
    }
    let gx = &dmat * &x;
    x.component_mul(&x).dot(&weights) + v * gx.dot(&gx)
}
