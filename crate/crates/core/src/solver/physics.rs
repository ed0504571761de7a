//! Flux and source operators evaluated from a ghost-padded state.

use crate::grid::{Array3, BoundarySpec, CellField, EdgeField, Face, FaceField, Grid, Padded, Stagger};
use crate::thermo::TransportModel;

use super::ghost::GhostState;

/// Viscous stress: diagonal entries at cell centers, off-diagonal entries `S_pq`
/// on the edges of type `e` (with `(e, p, q)` cyclic).
#[derive(Clone, Debug)]
pub struct StressField {
    pub diag: [CellField; 3],
    pub off: [Array3; 3],
}

#[inline]
pub(crate) fn cyc(e: usize) -> (usize, usize) {
    ((e + 1) % 3, (e + 2) % 3)
}

#[inline]
fn sh(mut idx: [isize; 3], axis: usize, by: isize) -> [isize; 3] {
    idx[axis] += by;
    idx
}

#[inline]
fn signed(idx: [usize; 3]) -> [isize; 3] {
    [idx[0] as isize, idx[1] as isize, idx[2] as isize]
}

/// Mean temperature of the four cells around an edge of type `e` (ghosts included).
#[inline]
fn edge_theta(theta: &Padded, e: usize, idx: [isize; 3]) -> f64 {
    let (p, q) = cyc(e);
    0.25 * (theta.at3(idx) + theta.at3(sh(idx, p, -1)) + theta.at3(sh(idx, q, -1)) + theta.at3(sh(sh(idx, p, -1), q, -1)))
}

/// Velocity divergence and normal strain rates at cell centers.
fn strain_diag(grid: &Grid, gh: &GhostState, idx: [isize; 3]) -> [f64; 3] {
    let h = grid.h();
    [0, 1, 2].map(|a| (gh.u[a].at3(sh(idx, a, 1)) - gh.u[a].at3(idx)) / h[a])
}

/// Shear rate `∂_p u_q + ∂_q u_p` at an edge of type `e`.
#[inline]
fn shear(grid: &Grid, gh: &GhostState, e: usize, idx: [isize; 3]) -> f64 {
    let h = grid.h();
    let (p, q) = cyc(e);
    (gh.u[q].at3(idx) - gh.u[q].at3(sh(idx, p, -1))) / h[p] + (gh.u[p].at3(idx) - gh.u[p].at3(sh(idx, q, -1))) / h[q]
}

/// Current `curl B` at an edge of type `e`.
#[inline]
fn current(grid: &Grid, gh: &GhostState, e: usize, idx: [isize; 3]) -> f64 {
    let h = grid.h();
    let (p, q) = cyc(e);
    (gh.b[q].at3(idx) - gh.b[q].at3(sh(idx, p, -1))) / h[p] - (gh.b[p].at3(idx) - gh.b[p].at3(sh(idx, q, -1))) / h[q]
}

pub fn viscous_stress(grid: &Grid, gh: &GhostState, transport: &TransportModel) -> StressField {
    let n = grid.n();
    let mut diag = [CellField::zeros(grid), CellField::zeros(grid), CellField::zeros(grid)];
    for idx in Array3::zeros(n).indices() {
        let s = signed(idx);
        let d = strain_diag(grid, gh, s);
        let dv = d[0] + d[1] + d[2];
        let th = gh.theta.at3(s);
        let (mu, eta) = (transport.mu(th), transport.eta(th));
        for a in 0..3 {
            diag[a].0.set(idx[0], idx[1], idx[2], mu * (2.0 * d[a] - 2.0 / 3.0 * dv) + eta * dv);
        }
    }
    let off = [0, 1, 2].map(|e| {
        Array3::from_fn(grid.dims(Stagger::Edge(e)), |idx| {
            let s = signed(idx);
            transport.mu(edge_theta(&gh.theta, e, s)) * shear(grid, gh, e, s)
        })
    });
    StressField { diag, off }
}

/// Fourier flux `q = −κ(θ)∇θ` on every face. Interior faces average κ of the two
/// cells; wall faces use κ at the wall temperature.
pub fn heat_flux(grid: &Grid, gh: &GhostState, transport: &TransportModel) -> FaceField {
    let n = grid.n();
    let h = grid.h();
    let mut q = FaceField::zeros(grid);
    for a in 0..3 {
        let arr = &mut q.c[a];
        for idx in arr.indices().collect::<Vec<_>>() {
            let s = signed(idx);
            let tr = gh.theta.at3(s);
            let tl = gh.theta.at3(sh(s, a, -1));
            let kappa = if idx[a] == 0 || idx[a] == n[a] {
                transport.kappa(0.5 * (tl + tr))
            } else {
                0.5 * (transport.kappa(tl) + transport.kappa(tr))
            };
            arr.set(idx[0], idx[1], idx[2], -kappa * (tr - tl) / h[a]);
        }
    }
    q
}

/// Magnetic stress `B⊗B − ½|B|²I` differenced onto interior faces; wall faces are zero.
pub fn lorentz_force(grid: &Grid, gh: &GhostState) -> FaceField {
    let n = grid.n();
    let h = grid.h();
    let bc = |s: [isize; 3]| [0, 1, 2].map(|a| 0.5 * (gh.b[a].at3(s) + gh.b[a].at3(sh(s, a, 1))));
    let tdiag: [Array3; 3] = {
        let cells: Vec<[f64; 3]> = Array3::zeros(n).indices().map(|i| bc(signed(i))).collect();
        [0, 1, 2].map(|a| {
            Array3::from_vec(
                n,
                cells.iter().map(|b| b[a] * b[a] - 0.5 * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2])).collect(),
            )
            .expect("cell-shaped")
        })
    };
    // T_pq on edges of type e.
    let toff = [0, 1, 2].map(|e| {
        let (p, q) = cyc(e);
        Array3::from_fn(grid.dims(Stagger::Edge(e)), |idx| {
            let s = signed(idx);
            let bp = 0.5 * (gh.b[p].at3(s) + gh.b[p].at3(sh(s, q, -1)));
            let bq = 0.5 * (gh.b[q].at3(s) + gh.b[q].at3(sh(s, p, -1)));
            bp * bq
        })
    });
    let mut f = FaceField::zeros(grid);
    for a in 0..3 {
        let arr = &mut f.c[a];
        for idx in arr.indices().collect::<Vec<_>>() {
            if idx[a] == 0 || idx[a] == n[a] {
                continue;
            }
            let mut lo = idx;
            lo[a] -= 1;
            let mut v = (tdiag[a].get(idx[0], idx[1], idx[2]) - tdiag[a].get(lo[0], lo[1], lo[2])) / h[a];
            for b in 0..3 {
                if b == a {
                    continue;
                }
                let e = 3 - a - b;
                let mut hi = idx;
                hi[b] += 1;
                v += (toff[e].get(hi[0], hi[1], hi[2]) - toff[e].get(idx[0], idx[1], idx[2])) / h[b];
            }
            arr.set(idx[0], idx[1], idx[2], v);
        }
    }
    f
}

/// Edge electromotive field, current and the resulting field tendency.
#[derive(Clone, Debug)]
pub struct Induction {
    /// `E = B × u + ζ curl B`, zero on edges lying in normal-data magnetic faces.
    pub emf: EdgeField,
    /// `curl B` at every edge, ghost-based on the boundary.
    pub current: EdgeField,
    /// `∂B/∂t = −curl E` at every face.
    pub db_dt: FaceField,
}

/// Whether an edge of type `e` lies in a magnetic face carrying normal data.
fn on_neumann_face(n: [usize; 3], neumann: &[bool; 6], e: usize, idx: [usize; 3]) -> bool {
    let (p, q) = cyc(e);
    [p, q].into_iter().any(|a| (idx[a] == 0 && neumann[2 * a]) || (idx[a] == n[a] && neumann[2 * a + 1]))
}

pub fn induction_rhs(grid: &Grid, gh: &GhostState, spec: &BoundarySpec, transport: &TransportModel) -> Induction {
    let n = grid.n();
    let neumann: [bool; 6] = std::array::from_fn(|i| !spec.face(Face::ALL[i]).magnetic.is_dirichlet());
    let mut emf = EdgeField::zeros(grid);
    let mut cur = EdgeField::zeros(grid);
    for e in 0..3 {
        let (p, q) = cyc(e);
        for idx in emf.c[e].indices().collect::<Vec<_>>() {
            let s = signed(idx);
            let j = current(grid, gh, e, s);
            cur.c[e].set(idx[0], idx[1], idx[2], j);
            if on_neumann_face(n, &neumann, e, idx) {
                continue;
            }
            let bp = 0.5 * (gh.b[p].at3(s) + gh.b[p].at3(sh(s, q, -1)));
            let bq = 0.5 * (gh.b[q].at3(s) + gh.b[q].at3(sh(s, p, -1)));
            let up = 0.5 * (gh.u[p].at3(s) + gh.u[p].at3(sh(s, q, -1)));
            let uq = 0.5 * (gh.u[q].at3(s) + gh.u[q].at3(sh(s, p, -1)));
            let zeta = transport.zeta(edge_theta(&gh.theta, e, s));
            emf.c[e].set(idx[0], idx[1], idx[2], bp * uq - bq * up + zeta * j);
        }
    }
    let mut db_dt = crate::grid::curl_edge_to_face(grid, &emf).expect("grid-shaped");
    db_dt.scale(-1.0);
    Induction { emf, current: cur, db_dt }
}

/// Pointwise nonnegative heating densities at cell centers: viscous `S:∇u` and
/// Joule `ζ|curl B|²`, each assembled from squares.
pub(crate) fn heating(grid: &Grid, gh: &GhostState, transport: &TransportModel) -> (CellField, CellField) {
    let n = grid.n();
    // Edge-based quantities: μ g² and ζ J² on every edge.
    let shear_sq = [0, 1, 2].map(|e| {
        Array3::from_fn(grid.dims(Stagger::Edge(e)), |idx| {
            let s = signed(idx);
            let g = shear(grid, gh, e, s);
            transport.mu(edge_theta(&gh.theta, e, s)) * g * g
        })
    });
    let joule_e = [0, 1, 2].map(|e| {
        Array3::from_fn(grid.dims(Stagger::Edge(e)), |idx| {
            let s = signed(idx);
            let j = current(grid, gh, e, s);
            transport.zeta(edge_theta(&gh.theta, e, s)) * j * j
        })
    });
    let avg4 = |arr: &Array3, e: usize, idx: [usize; 3]| {
        let (p, q) = cyc(e);
        let mut s = 0.0;
        for dp in 0..2 {
            for dq in 0..2 {
                let mut k = idx;
                k[p] += dp;
                k[q] += dq;
                s += arr.get(k[0], k[1], k[2]);
            }
        }
        0.25 * s
    };
    let mut visc = CellField::zeros(grid);
    let mut joule = CellField::zeros(grid);
    for idx in Array3::zeros(n).indices() {
        let s = signed(idx);
        let d = strain_diag(grid, gh, s);
        let dv = d[0] + d[1] + d[2];
        let th = gh.theta.at3(s);
        let normal = 2.0 * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) - 2.0 / 3.0 * dv * dv;
        let mut v = transport.mu(th) * normal.max(0.0) + transport.eta(th) * dv * dv;
        let mut jl = 0.0;
        for e in 0..3 {
            v += avg4(&shear_sq[e], e, idx);
            jl += avg4(&joule_e[e], e, idx);
        }
        visc.0.set(idx[0], idx[1], idx[2], v);
        joule.0.set(idx[0], idx[1], idx[2], jl);
    }
    (visc, joule)
}
