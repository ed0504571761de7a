//! Mimetic difference operators. No boundary conditions are applied: gradient and
//! face-to-edge curl are computed at interior locations only and are zero on the
//! box boundary; callers needing boundary-aware stencils use padded fields.

use super::{check_dims, Array3, CellField, EdgeField, FaceField, Grid, GridError, Stagger};

pub fn grad(grid: &Grid, f: &CellField) -> Result<FaceField, GridError> {
    check_dims(Stagger::Cell, grid.n(), f.0.dims())?;
    let h = grid.h();
    let mut out = FaceField::zeros(grid);
    for a in 0..3 {
        let comp = &mut out.c[a];
        let d = comp.dims();
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let idx = [i, j, k];
                    if idx[a] == 0 || idx[a] == grid.n()[a] {
                        continue;
                    }
                    let mut lo = idx;
                    lo[a] -= 1;
                    let v = (f.get(i, j, k) - f.get(lo[0], lo[1], lo[2])) / h[a];
                    comp.set(i, j, k, v);
                }
            }
        }
    }
    Ok(out)
}

pub fn div(grid: &Grid, v: &FaceField) -> Result<CellField, GridError> {
    for a in 0..3 {
        check_dims(Stagger::Face(a), grid.dims(Stagger::Face(a)), v.c[a].dims())?;
    }
    let h = grid.h();
    let [bx, by, bz] = &v.c;
    Ok(CellField(Array3::from_fn(grid.n(), |[i, j, k]| {
        (bx.get(i + 1, j, k) - bx.get(i, j, k)) / h[0]
            + (by.get(i, j + 1, k) - by.get(i, j, k)) / h[1]
            + (bz.get(i, j, k + 1) - bz.get(i, j, k)) / h[2]
    })))
}

/// Curl of a face field at interior edges (edges on the box boundary are left zero).
pub fn curl_face_to_edge(grid: &Grid, b: &FaceField) -> Result<EdgeField, GridError> {
    for a in 0..3 {
        check_dims(Stagger::Face(a), grid.dims(Stagger::Face(a)), b.c[a].dims())?;
    }
    let h = grid.h();
    let n = grid.n();
    let [bx, by, bz] = &b.c;
    let mut e = EdgeField::zeros(grid);
    for k in 1..n[2] {
        for j in 1..n[1] {
            for i in 0..n[0] {
                let v = (bz.get(i, j, k) - bz.get(i, j - 1, k)) / h[1] - (by.get(i, j, k) - by.get(i, j, k - 1)) / h[2];
                e.c[0].set(i, j, k, v);
            }
        }
    }
    for k in 1..n[2] {
        for j in 0..n[1] {
            for i in 1..n[0] {
                let v = (bx.get(i, j, k) - bx.get(i, j, k - 1)) / h[2] - (bz.get(i, j, k) - bz.get(i - 1, j, k)) / h[0];
                e.c[1].set(i, j, k, v);
            }
        }
    }
    for k in 0..n[2] {
        for j in 1..n[1] {
            for i in 1..n[0] {
                let v = (by.get(i, j, k) - by.get(i - 1, j, k)) / h[0] - (bx.get(i, j, k) - bx.get(i, j - 1, k)) / h[1];
                e.c[2].set(i, j, k, v);
            }
        }
    }
    Ok(e)
}

/// Curl of an edge field at every face, including boundary faces.
pub fn curl_edge_to_face(grid: &Grid, e: &EdgeField) -> Result<FaceField, GridError> {
    for a in 0..3 {
        check_dims(Stagger::Edge(a), grid.dims(Stagger::Edge(a)), e.c[a].dims())?;
    }
    let h = grid.h();
    let [ex, ey, ez] = &e.c;
    let fx = Array3::from_fn(grid.dims(Stagger::Face(0)), |[i, j, k]| {
        (ez.get(i, j + 1, k) - ez.get(i, j, k)) / h[1] - (ey.get(i, j, k + 1) - ey.get(i, j, k)) / h[2]
    });
    let fy = Array3::from_fn(grid.dims(Stagger::Face(1)), |[i, j, k]| {
        (ex.get(i, j, k + 1) - ex.get(i, j, k)) / h[2] - (ez.get(i + 1, j, k) - ez.get(i, j, k)) / h[0]
    });
    let fz = Array3::from_fn(grid.dims(Stagger::Face(2)), |[i, j, k]| {
        (ey.get(i + 1, j, k) - ey.get(i, j, k)) / h[0] - (ex.get(i, j + 1, k) - ex.get(i, j, k)) / h[1]
    });
    Ok(FaceField { c: [fx, fy, fz] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn div_of_position_is_three() {
        let g = Grid::new([5, 6, 7], [1.0, 2.0, 0.5]).unwrap();
        let u = FaceField::from_fn(&g, |p| p);
        let d = div(&g, &u).unwrap();
        assert!(d.data().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn grad_of_linear_is_constant() {
        let g = Grid::cube(6).unwrap();
        let f = CellField::from_fn(&g, |p| 2.0 * p[0] - p[1] + 0.5 * p[2]);
        let gr = grad(&g, &f).unwrap();
        let want = [2.0, -1.0, 0.5];
        for a in 0..3 {
            for idx in gr.c[a].indices() {
                if idx[a] == 0 || idx[a] == 6 {
                    continue;
                }
                assert!((gr.c[a].get(idx[0], idx[1], idx[2]) - want[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_stagger_is_rejected() {
        let g = Grid::cube(4).unwrap();
        let h = Grid::cube(5).unwrap();
        let f = CellField::zeros(&h);
        assert!(matches!(grad(&g, &f), Err(GridError::StaggerMismatch { .. })));
    }
}
