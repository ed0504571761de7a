//! Ghost layers encoding the boundary conditions.

use crate::grid::{
    BoundarySpec, Face, FaceField, FluidState, Grid, MagneticBc, Padded, Stagger, ThermalBc, VelocityBc,
};
use crate::thermo::TransportModel;

use super::{Models, SolverError};

pub(crate) const GHOSTS: usize = 2;

/// State fields padded with boundary-condition ghosts.
#[derive(Clone, Debug)]
pub struct GhostState {
    pub t: f64,
    pub rho: Padded,
    pub theta: Padded,
    pub u: [Padded; 3],
    pub b: [Padded; 3],
}

/// Boundary data sampled on the planes the ghost filling needs, indexed by the
/// signed tangential indices of the ghost entries.
#[derive(Clone, Debug)]
struct Plane {
    lo: [isize; 2],
    dims: [usize; 2],
    data: Vec<f64>,
}

impl Plane {
    fn sample(lo: [isize; 2], dims: [usize; 2], mut f: impl FnMut(isize, isize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1]);
        for j in 0..dims[1] as isize {
            for i in 0..dims[0] as isize {
                data.push(f(lo[0] + i, lo[1] + j));
            }
        }
        Plane { lo, dims, data }
    }
    #[inline]
    fn get(&self, i: isize, j: isize) -> f64 {
        let a = (i - self.lo[0]) as usize;
        let b = (j - self.lo[1]) as usize;
        self.data[a + self.dims[0] * b]
    }
}

/// Wall values of the boundary data at one time: `θ_B` on temperature faces and the
/// tangential field `n × b_τ` (per component) on magnetic Dirichlet faces.
#[derive(Clone, Debug)]
pub(crate) struct WallSamples {
    t: f64,
    theta: [Option<Plane>; 6],
    b_tangential: [[Option<Plane>; 3]; 6],
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Signed range of a padded array along `axis` for the given stagger.
fn full_range(grid: &Grid, s: Stagger, axis: usize) -> (isize, usize) {
    let d = grid.dims(s)[axis];
    (-(GHOSTS as isize), d + 2 * GHOSTS)
}

impl WallSamples {
    pub(crate) fn new(grid: &Grid, spec: &BoundarySpec, t: f64) -> Self {
        let mut theta: [Option<Plane>; 6] = Default::default();
        let mut b_tangential: [[Option<Plane>; 3]; 6] = Default::default();
        for f in Face::ALL {
            let d = f.axis();
            let (tb, tc) = Grid::tangential_axes(d);
            let wall = grid.wall(d, f.side());
            if let ThermalBc::Dirichlet(data) = &spec.face(f).thermal {
                let (lb, nb) = full_range(grid, Stagger::Cell, tb);
                let (lc, nc) = full_range(grid, Stagger::Cell, tc);
                theta[f.index()] = Some(Plane::sample([lb, lc], [nb, nc], |i, j| {
                    let mut idx = [0isize; 3];
                    idx[tb] = i;
                    idx[tc] = j;
                    let mut p = grid.position_signed(Stagger::Cell, idx);
                    p[d] = wall;
                    data.eval(t, p)
                }));
            }
            if let MagneticBc::TangentialDirichlet(data) = &spec.face(f).magnetic {
                let nrm = f.normal();
                for a in [tb, tc] {
                    let s = Stagger::Face(a);
                    let (lb, nb) = full_range(grid, s, tb);
                    let (lc, nc) = full_range(grid, s, tc);
                    b_tangential[f.index()][a] = Some(Plane::sample([lb, lc], [nb, nc], |i, j| {
                        let mut idx = [0isize; 3];
                        idx[tb] = i;
                        idx[tc] = j;
                        let mut p = grid.position_signed(s, idx);
                        p[d] = wall;
                        cross(nrm, data.eval(t, p))[a]
                    }));
                }
            }
        }
        WallSamples { t, theta, b_tangential }
    }

    pub(crate) fn time(&self) -> f64 {
        self.t
    }
}

/// Ghost and mirror indices along the wall-normal axis for layer `m ≥ 1`.
/// `nodal` marks arrays whose core includes the wall itself (face normals).
#[inline]
fn ghost_mirror(n: usize, side: usize, m: usize, nodal: bool) -> (isize, isize) {
    let (n, m) = (n as isize, m as isize);
    match (side, nodal) {
        (0, false) => (-m, m - 1),
        (_, false) => (n + m - 1, n - m),
        (0, true) => (-m, m),
        (_, true) => (n + m, n - m),
    }
}

/// Visit every column of `p` normal to `axis` (all tangential indices, ghosts included).
fn for_columns(p: &Padded, axis: usize, mut f: impl FnMut([isize; 3])) {
    let (b, c) = Grid::tangential_axes(axis);
    for jc in p.full_range(c) {
        for jb in p.full_range(b) {
            let mut idx = [0isize; 3];
            idx[b] = jb;
            idx[c] = jc;
            f(idx);
        }
    }
}

#[inline]
fn with(mut idx: [isize; 3], axis: usize, v: isize) -> [isize; 3] {
    idx[axis] = v;
    idx
}

fn fill_even(p: &mut Padded, axis: usize, side: usize, n: usize, nodal: bool, sign: f64) {
    let mut cols = Vec::new();
    for_columns(p, axis, |idx| cols.push(idx));
    for idx in cols {
        for m in 1..=GHOSTS {
            let (g, r) = ghost_mirror(n, side, m, nodal);
            let v = sign * p.at3(with(idx, axis, r));
            p.set3(with(idx, axis, g), v);
        }
    }
}

/// Newton solve for the wall temperature of a radiative face:
/// `2κ(θ_w)(θ_w − θ_in)/h + d|θ_w − θ₀|^k (θ_w − θ₀) = 0`.
fn radiative_wall(transport: &TransportModel, theta_in: f64, h: f64, d: f64, theta0: f64, k: f64) -> Option<f64> {
    let g = |tw: f64| 2.0 * transport.kappa(tw) * (tw - theta_in) / h + d * (tw - theta0).abs().powf(k) * (tw - theta0);
    let (mut lo, mut hi) = if theta0 < theta_in { (theta0, theta_in) } else { (theta_in, theta0) };
    if hi - lo <= 1e-15 * hi.abs() {
        return Some(0.5 * (lo + hi));
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = g(t);
        if r == 0.0 {
            return Some(t);
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let eps = 1e-7 * t.abs().max(1e-12);
        let dr = (g(t + eps) - g(t - eps)) / (2.0 * eps);
        let mut next = t - r / dr;
        if !(next > lo && next < hi) || !dr.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-14 * t.abs().max(1e-300) {
            return (next > 0.0).then_some(next);
        }
        t = next;
    }
    None
}

fn fill_theta(
    grid: &Grid,
    p: &mut Padded,
    spec: &BoundarySpec,
    walls: &WallSamples,
    transport: &TransportModel,
) -> Result<(), SolverError> {
    let n = grid.n();
    let h = grid.h();
    for axis in 0..3 {
        for side in 0..2 {
            let f = Face::new(axis, side);
            let (tb, tc) = Grid::tangential_axes(axis);
            match &spec.face(f).thermal {
                ThermalBc::Insulated => fill_even(p, axis, side, n[axis], false, 1.0),
                ThermalBc::Dirichlet(_) => {
                    let plane = walls.theta[f.index()].as_ref().expect("sampled with the spec");
                    let mut cols = Vec::new();
                    for_columns(p, axis, |idx| cols.push(idx));
                    for idx in cols {
                        let tw = plane.get(idx[tb], idx[tc]);
                        for m in 1..=GHOSTS {
                            let (g, r) = ghost_mirror(n[axis], side, m, false);
                            let v = 2.0 * tw - p.at3(with(idx, axis, r));
                            p.set3(with(idx, axis, g), v);
                        }
                    }
                }
                ThermalBc::Radiative { d, theta0, k } => {
                    let mut cols = Vec::new();
                    for_columns(p, axis, |idx| cols.push(idx));
                    for idx in cols {
                        let (_, r1) = ghost_mirror(n[axis], side, 1, false);
                        let inner = p.at3(with(idx, axis, r1));
                        let tw = radiative_wall(transport, inner, h[axis], *d, *theta0, *k)
                            .ok_or(SolverError::RadiativeNewton { face: f.name(), cell: with(idx, axis, r1) })?;
                        for m in 1..=GHOSTS {
                            let (g, r) = ghost_mirror(n[axis], side, m, false);
                            let v = 2.0 * tw - p.at3(with(idx, axis, r));
                            p.set3(with(idx, axis, g), v);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn fill_velocity(
    grid: &Grid,
    u: &mut [Padded; 3],
    theta: &Padded,
    spec: &BoundarySpec,
    transport: &TransportModel,
) {
    let n = grid.n();
    let h = grid.h();
    for axis in 0..3 {
        for side in 0..2 {
            let f = Face::new(axis, side);
            let bc = &spec.face(f).velocity;
            for (a, p) in u.iter_mut().enumerate() {
                if a == axis {
                    // Impermeable wall: odd reflection about the wall face.
                    fill_even(p, axis, side, n[axis], true, -1.0);
                    continue;
                }
                match bc {
                    VelocityBc::NoSlip => fill_even(p, axis, side, n[axis], false, -1.0),
                    VelocityBc::Slip => fill_even(p, axis, side, n[axis], false, 1.0),
                    VelocityBc::NavierSlip { d } => {
                        let mut cols = Vec::new();
                        for_columns(p, axis, |idx| cols.push(idx));
                        for idx in cols {
                            // Viscosity of the wall-adjacent cell at this tangential location.
                            let mut c = idx;
                            let (_, r1) = ghost_mirror(n[axis], side, 1, false);
                            c[axis] = r1;
                            for (t, ct) in c.iter_mut().enumerate() {
                                if t != axis {
                                    *ct = (*ct).clamp(0, n[t] as isize - 1);
                                }
                            }
                            let mu = transport.mu(theta.at3(c));
                            let factor = (mu / h[axis] - 0.5 * d) / (mu / h[axis] + 0.5 * d);
                            for m in 1..=GHOSTS {
                                let (g, r) = ghost_mirror(n[axis], side, m, false);
                                let v = factor * p.at3(with(idx, axis, r));
                                p.set3(with(idx, axis, g), v);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn fill_magnetic(grid: &Grid, b: &mut [Padded; 3], core: &FaceField, spec: &BoundarySpec, walls: &WallSamples) {
    let n = grid.n();
    let h = grid.h();
    for axis in 0..3 {
        for side in 0..2 {
            let f = Face::new(axis, side);
            for a in 0..3 {
                let p = &mut b[a];
                if a == axis {
                    fill_even(p, axis, side, n[axis], true, 1.0);
                    continue;
                }
                let mut cols = Vec::new();
                for_columns(p, axis, |idx| cols.push(idx));
                match &spec.face(f).magnetic {
                    MagneticBc::TangentialDirichlet(_) => {
                        let plane = walls.b_tangential[f.index()][a].as_ref().expect("sampled with the spec");
                        let (tb, tc) = Grid::tangential_axes(axis);
                        for idx in cols {
                            let bw = plane.get(idx[tb], idx[tc]);
                            for m in 1..=GHOSTS {
                                let (g, r) = ghost_mirror(n[axis], side, m, false);
                                let v = 2.0 * bw - p.at3(with(idx, axis, r));
                                p.set3(with(idx, axis, g), v);
                            }
                        }
                    }
                    MagneticBc::NormalNeumann(_) => {
                        // Zero tangential current: ∂_n B_a = ∂_a B_n on the wall.
                        let c = 3 - axis - a;
                        let w = if side == 0 { 0 } else { n[axis] };
                        let bn = &core.c[axis];
                        let sign = if side == 0 { -1.0 } else { 1.0 };
                        for idx in cols {
                            let i = idx[a];
                            let deriv = if i >= 1 && i < n[a] as isize {
                                let jc = idx[c].clamp(0, n[c] as isize - 1) as usize;
                                let mut hi = [0usize; 3];
                                hi[axis] = w;
                                hi[c] = jc;
                                hi[a] = i as usize;
                                let mut lo = hi;
                                lo[a] -= 1;
                                (bn.get(hi[0], hi[1], hi[2]) - bn.get(lo[0], lo[1], lo[2])) / h[a]
                            } else {
                                0.0
                            };
                            for m in 1..=GHOSTS {
                                let (g, r) = ghost_mirror(n[axis], side, m, false);
                                let v = p.at3(with(idx, axis, r)) + sign * (2 * m - 1) as f64 * h[axis] * deriv;
                                p.set3(with(idx, axis, g), v);
                            }
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn fill_ghosts(
    grid: &Grid,
    state: &FluidState,
    spec: &BoundarySpec,
    walls: &WallSamples,
    models: &Models,
) -> Result<GhostState, SolverError> {
    let n = grid.n();
    let mut rho = Padded::from_core(&state.rho.0, GHOSTS);
    for axis in 0..3 {
        for side in 0..2 {
            fill_even(&mut rho, axis, side, n[axis], false, 1.0);
        }
    }
    let mut theta = Padded::from_core(&state.theta.0, GHOSTS);
    fill_theta(grid, &mut theta, spec, walls, &models.transport)?;
    let mut u = [0, 1, 2].map(|a| Padded::from_core(&state.u.c[a], GHOSTS));
    fill_velocity(grid, &mut u, &theta, spec, &models.transport);
    let mut b = [0, 1, 2].map(|a| Padded::from_core(&state.b.c[a], GHOSTS));
    fill_magnetic(grid, &mut b, &state.b, spec, walls);
    Ok(GhostState { t: walls.time(), rho, theta, u, b })
}

/// Populate ghost layers for `state` with the boundary data at time `t`.
pub fn apply_boundary_conditions(
    grid: &Grid,
    state: &FluidState,
    spec: &BoundarySpec,
    t: f64,
    models: &Models,
) -> Result<GhostState, SolverError> {
    let walls = WallSamples::new(grid, spec, t);
    fill_ghosts(grid, state, spec, &walls, models)
}
