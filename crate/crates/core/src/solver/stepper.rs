use serde::Serialize;

use crate::grid::{Array3, BoundarySpec, CellField, FaceField, FluidState, Grid, Padded, Stagger};

use super::ghost::{fill_ghosts, GhostState, WallSamples, GHOSTS};
use super::physics::{heat_flux, heating, induction_rhs, lorentz_force, viscous_stress};
use super::{Models, Reconstruction, SolverConfig, SolverError};

#[derive(Clone, Debug, Serialize)]
pub struct StepInfo {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Stages recomputed with first-order reconstruction so far.
    pub first_order_retries: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub first_order_retries: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

/// Conserved variables: density, face momenta, internal energy density, field.
#[derive(Clone, Debug)]
struct Cons {
    rho: Array3,
    mom: [Array3; 3],
    energy: Array3,
    b: [Array3; 3],
}

impl Cons {
    fn axpy(&mut self, s: f64, o: &Cons) {
        let add = |x: &mut Array3, y: &Array3| x.data_mut().iter_mut().zip(y.data()).for_each(|(a, b)| *a += s * b);
        add(&mut self.rho, &o.rho);
        add(&mut self.energy, &o.energy);
        for a in 0..3 {
            add(&mut self.mom[a], &o.mom[a]);
            add(&mut self.b[a], &o.b[a]);
        }
    }
    fn scale(&mut self, s: f64) {
        let sc = |x: &mut Array3| x.data_mut().iter_mut().for_each(|a| *a *= s);
        sc(&mut self.rho);
        sc(&mut self.energy);
        for a in 0..3 {
            sc(&mut self.mom[a]);
            sc(&mut self.b[a]);
        }
    }
}

#[inline]
fn van_albada(a: f64, b: f64) -> f64 {
    let ab = a * b;
    if ab <= 0.0 {
        0.0
    } else {
        ab * (a + b) / (a * a + b * b)
    }
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

/// Upwind state at the interface between `idx − e_axis` and `idx` of a padded array.
#[inline]
fn upwind(p: &Padded, idx: [isize; 3], axis: usize, forward: bool, order: Reconstruction) -> f64 {
    let l = p.at3(sh(idx, axis, -1));
    let r = p.at3(idx);
    match (order, forward) {
        (Reconstruction::FirstOrder, true) => l,
        (Reconstruction::FirstOrder, false) => r,
        (Reconstruction::Muscl, true) => {
            let ll = p.at3(sh(idx, axis, -2));
            l + 0.5 * van_albada(l - ll, r - l)
        }
        (Reconstruction::Muscl, false) => {
            let rr = p.at3(sh(idx, axis, 1));
            r - 0.5 * van_albada(r - l, rr - r)
        }
    }
}

#[inline]
fn face_density(rho: &Array3, a: usize, idx: [usize; 3], n: [usize; 3]) -> f64 {
    let i = idx[a];
    let mut lo = idx;
    let hi_ok = i < n[a];
    let lo_ok = i > 0;
    if lo_ok {
        lo[a] -= 1;
    }
    match (lo_ok, hi_ok) {
        (true, true) => 0.5 * (rho.get(lo[0], lo[1], lo[2]) + rho.get(idx[0], idx[1], idx[2])),
        (true, false) => rho.get(lo[0], lo[1], lo[2]),
        (false, _) => rho.get(idx[0], idx[1], idx[2]),
    }
}

/// The integrator: caches boundary samples and the potential when they are
/// time-independent.
struct Integrator<'a> {
    grid: &'a Grid,
    spec: &'a BoundarySpec,
    models: &'a Models,
    config: &'a SolverConfig,
    walls: Option<WallSamples>,
    potential: Option<Array3>,
}

impl<'a> Integrator<'a> {
    fn new(grid: &'a Grid, spec: &'a BoundarySpec, models: &'a Models, config: &'a SolverConfig) -> Self {
        let walls = (!spec.thermal_time_dependent() && !spec.magnetic_time_dependent())
            .then(|| WallSamples::new(grid, spec, 0.0));
        let potential = (!spec.env.gravity.time_dependent()).then(|| potential_cells(grid, spec, 0.0));
        Integrator { grid, spec, models, config, walls, potential }
    }

    fn ghosts(&self, state: &FluidState, t: f64) -> Result<GhostState, SolverError> {
        match &self.walls {
            Some(w) => {
                let mut g = fill_ghosts(self.grid, state, self.spec, w, self.models)?;
                g.t = t;
                Ok(g)
            }
            None => fill_ghosts(self.grid, state, self.spec, &WallSamples::new(self.grid, self.spec, t), self.models),
        }
    }

    fn potential(&self, t: f64) -> std::borrow::Cow<'_, Array3> {
        match &self.potential {
            Some(p) => std::borrow::Cow::Borrowed(p),
            None => std::borrow::Cow::Owned(potential_cells(self.grid, self.spec, t)),
        }
    }

    fn to_cons(&self, s: &FluidState) -> Cons {
        let n = self.grid.n();
        let eos = &self.models.eos;
        let energy = Array3::from_fn(n, |[i, j, k]| eos.energy_density_raw(s.rho.get(i, j, k), s.theta.get(i, j, k)));
        let mom = [0, 1, 2].map(|a| {
            Array3::from_fn(self.grid.dims(Stagger::Face(a)), |idx| {
                face_density(&s.rho.0, a, idx, n) * s.u.c[a].get(idx[0], idx[1], idx[2])
            })
        });
        Cons { rho: s.rho.0.clone(), mom, energy, b: s.b.c.clone() }
    }

    /// Primitive state from conserved variables; `guess` supplies the Newton start for θ.
    fn to_state(&self, c: &Cons, t: f64, guess: &CellField) -> Result<FluidState, (SolverError, bool)> {
        let n = self.grid.n();
        let eos = &self.models.eos;
        let mut theta = CellField::zeros(self.grid);
        for idx in c.rho.indices() {
            let [i, j, k] = idx;
            let rho = c.rho.get(i, j, k);
            let en = c.energy.get(i, j, k);
            if !rho.is_finite() || !en.is_finite() {
                return Err((SolverError::NonFinite { what: "state", cell: idx, t }, false));
            }
            if rho < 0.0 {
                return Err((SolverError::NegativeDensity { rho, cell: idx, t }, true));
            }
            match eos.temperature_from_energy(rho, en, guess.get(i, j, k)) {
                Some(th) if th > 0.0 && th.is_finite() => theta.0.set(i, j, k, th),
                _ => return Err((SolverError::Positivity { cell: idx, t }, true)),
            }
        }
        let rho_min = eos.rho_min();
        let u = FaceField {
            c: [0, 1, 2].map(|a| {
                Array3::from_fn(self.grid.dims(Stagger::Face(a)), |idx| {
                    if idx[a] == 0 || idx[a] == n[a] {
                        0.0
                    } else {
                        c.mom[a].get(idx[0], idx[1], idx[2]) / face_density(&c.rho, a, idx, n).max(rho_min)
                    }
                })
            }),
        };
        if u.c.iter().any(|c| c.data().iter().any(|v| !v.is_finite())) {
            return Err((SolverError::NonFinite { what: "velocity", cell: [0; 3], t }, false));
        }
        Ok(FluidState { t, rho: CellField(c.rho.clone()), theta, u, b: FaceField { c: c.b.clone() } })
    }

    /// Time derivative of the conserved variables.
    fn rhs(&self, s: &FluidState, t: f64, order: Reconstruction) -> Result<Cons, SolverError> {
        let grid = self.grid;
        let n = grid.n();
        let h = grid.h();
        let eos = &self.models.eos;
        let tr = &self.models.transport;
        let gh = self.ghosts(s, t)?;

        // Cell pressure and energy (padded with even ghosts for reconstruction).
        let pressure = Array3::from_fn(n, |[i, j, k]| eos.pressure_raw(s.rho.get(i, j, k), s.theta.get(i, j, k)));
        let energy = Array3::from_fn(n, |[i, j, k]| eos.energy_density_raw(s.rho.get(i, j, k), s.theta.get(i, j, k)));
        let mut en_p = Padded::from_core(&energy, GHOSTS);
        fill_even_cells(&mut en_p, n);

        // Mass and energy fluxes.
        let q = heat_flux(grid, &gh, tr);
        let mut fm: [Array3; 3] = [0, 1, 2].map(|a| Array3::zeros(grid.dims(Stagger::Face(a))));
        let mut fe = q.c.clone();
        for a in 0..3 {
            for idx in fm[a].indices().collect::<Vec<_>>() {
                if idx[a] == 0 || idx[a] == n[a] {
                    continue;
                }
                let sidx = signed(idx);
                let u = s.u.c[a].get(idx[0], idx[1], idx[2]);
                let fwd = u >= 0.0;
                let rho_up = upwind(&gh.rho, sidx, a, fwd, order);
                let en_up = upwind(&en_p, sidx, a, fwd, order);
                fm[a].set(idx[0], idx[1], idx[2], u * rho_up);
                fe[a].add(idx[0], idx[1], idx[2], u * en_up);
            }
        }
        let div_of = |f: &[Array3; 3], [i, j, k]: [usize; 3]| {
            (f[0].get(i + 1, j, k) - f[0].get(i, j, k)) / h[0]
                + (f[1].get(i, j + 1, k) - f[1].get(i, j, k)) / h[1]
                + (f[2].get(i, j, k + 1) - f[2].get(i, j, k)) / h[2]
        };
        let drho = Array3::from_fn(n, |idx| -div_of(&fm, idx));

        let (visc, joule) = if self.config.heating_on {
            let (v, j) = heating(grid, &gh, tr);
            (Some(v), Some(j))
        } else {
            (None, None)
        };
        let denergy = Array3::from_fn(n, |idx| {
            let [i, j, k] = idx;
            let dv = (s.u.c[0].get(i + 1, j, k) - s.u.c[0].get(i, j, k)) / h[0]
                + (s.u.c[1].get(i, j + 1, k) - s.u.c[1].get(i, j, k)) / h[1]
                + (s.u.c[2].get(i, j, k + 1) - s.u.c[2].get(i, j, k)) / h[2];
            let mut v = -div_of(&fe, idx) - pressure.get(i, j, k) * dv;
            if let (Some(vh), Some(jh)) = (&visc, &joule) {
                v += vh.get(i, j, k) + jh.get(i, j, k);
            }
            v
        });

        // Momentum.
        let stress = viscous_stress(grid, &gh, tr);
        let lorentz = lorentz_force(grid, &gh);
        let pot = self.potential(t);
        let mut dmom: [Array3; 3] = [0, 1, 2].map(|a| Array3::zeros(grid.dims(Stagger::Face(a))));
        for a in 0..3 {
            // Advective fluxes of a-momentum along each axis b on the dual faces.
            // b = a: at cell centers; b ≠ a: at edges of type 3 − a − b.
            let mut flux_aa = Array3::zeros(n);
            for idx in flux_aa.indices().collect::<Vec<_>>() {
                let mut hi = idx;
                hi[a] += 1;
                let fbar = 0.5 * (fm[a].get(idx[0], idx[1], idx[2]) + fm[a].get(hi[0], hi[1], hi[2]));
                // Interface between faces idx and idx + e_a: shift to the upper face.
                let u_up = upwind(&gh.u[a], signed(hi), a, fbar >= 0.0, order);
                flux_aa.set(idx[0], idx[1], idx[2], fbar * u_up);
            }
            let others: Vec<usize> = (0..3).filter(|b| *b != a).collect();
            let mut flux_ab: Vec<Array3> = Vec::with_capacity(2);
            for &b in &others {
                let e = 3 - a - b;
                let mut arr = Array3::zeros(grid.dims(Stagger::Edge(e)));
                for idx in arr.indices().collect::<Vec<_>>() {
                    if idx[a] == 0 || idx[a] == n[a] || idx[b] == 0 || idx[b] == n[b] {
                        continue;
                    }
                    let mut lo = idx;
                    lo[a] -= 1;
                    let fbar = 0.5 * (fm[b].get(idx[0], idx[1], idx[2]) + fm[b].get(lo[0], lo[1], lo[2]));
                    let u_up = upwind(&gh.u[a], signed(idx), b, fbar >= 0.0, order);
                    arr.set(idx[0], idx[1], idx[2], fbar * u_up);
                }
                flux_ab.push(arr);
            }
            let d = &mut dmom[a];
            for idx in d.indices().collect::<Vec<_>>() {
                if idx[a] == 0 || idx[a] == n[a] {
                    continue;
                }
                let [i, j, k] = idx;
                let mut lo = idx;
                lo[a] -= 1;
                let mut v = -(flux_aa.get(i, j, k) - flux_aa.get(lo[0], lo[1], lo[2])) / h[a];
                for (bi, &b) in others.iter().enumerate() {
                    let mut hi = idx;
                    hi[b] += 1;
                    v -= (flux_ab[bi].get(hi[0], hi[1], hi[2]) - flux_ab[bi].get(i, j, k)) / h[b];
                    let e = 3 - a - b;
                    v += (stress.off[e].get(hi[0], hi[1], hi[2]) - stress.off[e].get(i, j, k)) / h[b];
                }
                v -= (pressure.get(i, j, k) - pressure.get(lo[0], lo[1], lo[2])) / h[a];
                v += (stress.diag[a].get(i, j, k) - stress.diag[a].get(lo[0], lo[1], lo[2])) / h[a];
                let rho_f = 0.5 * (s.rho.get(i, j, k) + s.rho.get(lo[0], lo[1], lo[2]));
                v += rho_f * (pot.get(i, j, k) - pot.get(lo[0], lo[1], lo[2])) / h[a];
                v += lorentz.c[a].get(i, j, k);
                d.set(i, j, k, v);
            }
        }

        let ind = induction_rhs(grid, &gh, self.spec, tr);
        Ok(Cons { rho: drho, mom: dmom, energy: denergy, b: ind.db_dt.c })
    }

    /// `U + dt L(U)`, retried with first-order reconstruction when the result is not admissible.
    fn stage(
        &self,
        s: &FluidState,
        t: f64,
        dt: f64,
        retries: &mut usize,
    ) -> Result<(Cons, FluidState), SolverError> {
        let base = self.to_cons(s);
        let mut order = self.config.reconstruction;
        loop {
            let mut next = base.clone();
            next.axpy(dt, &self.rhs(s, t, order)?);
            match self.to_state(&next, t + dt, &s.theta) {
                Ok(st) => return Ok((next, st)),
                Err((e, retryable)) => {
                    if retryable && order == Reconstruction::Muscl {
                        order = Reconstruction::FirstOrder;
                        *retries += 1;
                        continue;
                    }
                    return Err(e);
                }
            }
        }
    }

    /// Rotate velocities by the Coriolis term over `tau` with the implicit midpoint rule.
    fn coriolis(&self, s: &mut FluidState, tau: f64) {
        let w = self.spec.env.omega;
        if w == [0.0; 3] || tau == 0.0 {
            return;
        }
        let n = self.grid.n();
        let old = s.u.clone();
        // v_b interpolated to faces of axis a (mean of the four neighbours).
        let interp = |u: &FaceField, a: usize, b: usize, idx: [usize; 3]| {
            let mut sum = 0.0;
            for da in 0..2 {
                for db in 0..2 {
                    let mut k = idx;
                    if da == 0 {
                        k[a] -= 1;
                    }
                    k[b] += db;
                    sum += u.c[b].get(k[0], k[1], k[2]);
                }
            }
            0.25 * sum
        };
        let mut cur = old.clone();
        for _ in 0..100 {
            let mut mid = old.clone();
            mid.scale(0.5);
            mid.axpy(0.5, &cur);
            let mut next = old.clone();
            let mut change = 0.0_f64;
            for a in 0..3 {
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                for idx in next.c[a].indices().collect::<Vec<_>>() {
                    if idx[a] == 0 || idx[a] == n[a] {
                        continue;
                    }
                    let vb = interp(&mid, a, b, idx);
                    let vc = interp(&mid, a, c, idx);
                    // ∂t u = −ω × u
                    let rot = w[b] * vc - w[c] * vb;
                    let v = old.c[a].get(idx[0], idx[1], idx[2]) - tau * rot;
                    change = change.max((v - cur.c[a].get(idx[0], idx[1], idx[2])).abs());
                    next.c[a].set(idx[0], idx[1], idx[2], v);
                }
            }
            cur = next;
            if change <= 1e-15 * cur.max_abs().max(1e-300) {
                break;
            }
        }
        s.u = cur;
    }

    fn step(&self, s: &FluidState, dt: f64, retries: &mut usize) -> Result<FluidState, SolverError> {
        let t0 = s.t;
        let mut a = s.clone();
        self.coriolis(&mut a, 0.5 * dt);
        let u0 = self.to_cons(&a);
        let (_, s1) = self.stage(&a, t0, dt, retries)?;
        let (c2, _) = self.stage(&s1, t0 + dt, dt, retries)?;
        let mut fin = u0;
        fin.axpy(1.0, &c2);
        fin.scale(0.5);
        let mut out = self.to_state(&fin, t0 + dt, &s1.theta).map_err(|(e, _)| e)?;
        self.coriolis(&mut out, 0.5 * dt);
        out.t = t0 + dt;
        Ok(out)
    }

    fn stable_dt(&self, s: &FluidState) -> Result<f64, SolverError> {
        let grid = self.grid;
        let h = grid.h();
        let inv_h2: f64 = h.iter().map(|x| 1.0 / (x * x)).sum();
        let eos = &self.models.eos;
        let tr = &self.models.transport;
        let mut dt = f64::INFINITY;
        for idx in s.rho.0.indices() {
            let [i, j, k] = idx;
            let rho = s.rho.get(i, j, k).max(eos.rho_min());
            let th = s.theta.get(i, j, k);
            let mut b2 = 0.0;
            let mut adv = f64::INFINITY;
            let c2 = eos.sound_speed_sq_raw(rho, th);
            let mut ua = [0.0; 3];
            for a in 0..3 {
                let mut hi = idx;
                hi[a] += 1;
                let bc = 0.5 * (s.b.c[a].get(i, j, k) + s.b.c[a].get(hi[0], hi[1], hi[2]));
                b2 += bc * bc;
                ua[a] = s.u.c[a].get(i, j, k).abs().max(s.u.c[a].get(hi[0], hi[1], hi[2]).abs());
            }
            let cf = (c2 + b2 / rho).sqrt();
            for a in 0..3 {
                adv = adv.min(h[a] / (ua[a] + cf));
            }
            let nu = (4.0 / 3.0 * tr.mu(th) + tr.eta(th)) / rho;
            let visc = 1.0 / (2.0 * nu * inv_h2);
            let res = 1.0 / (2.0 * tr.zeta(th) * inv_h2);
            let cond = eos.heat_capacity_raw(rho, th) / (2.0 * tr.kappa(th) * inv_h2);
            let local = adv.min(visc).min(res).min(cond);
            if local.is_nan() || !(cf.is_finite()) {
                return Err(SolverError::NonFinite { what: "signal speed", cell: idx, t: s.t });
            }
            dt = dt.min(local);
        }
        Ok((self.config.cfl * dt).min(self.config.dt_max))
    }
}

fn fill_even_cells(p: &mut Padded, n: [usize; 3]) {
    for axis in 0..3 {
        let (b, c) = Grid::tangential_axes(axis);
        for jc in p.full_range(c) {
            for jb in p.full_range(b) {
                let mut idx = [0isize; 3];
                idx[b] = jb;
                idx[c] = jc;
                for m in 1..=GHOSTS as isize {
                    let mut g = idx;
                    let mut r = idx;
                    g[axis] = -m;
                    r[axis] = m - 1;
                    let v = p.at3(r);
                    p.set3(g, v);
                    g[axis] = n[axis] as isize + m - 1;
                    r[axis] = n[axis] as isize - m;
                    let v = p.at3(r);
                    p.set3(g, v);
                }
            }
        }
    }
}

fn potential_cells(grid: &Grid, spec: &BoundarySpec, t: f64) -> Array3 {
    Array3::from_fn(grid.n(), |idx| spec.env.potential(t, grid.position(Stagger::Cell, idx)))
}

/// Largest stable time step for the explicit scheme, capped at `dt_max`.
pub fn stable_dt(
    grid: &Grid,
    state: &FluidState,
    spec: &BoundarySpec,
    config: &SolverConfig,
    models: &Models,
) -> Result<f64, SolverError> {
    Integrator::new(grid, spec, models, config).stable_dt(state)
}

/// One SSP-RK2 step of size `dt`.
pub fn step(
    grid: &Grid,
    state: &FluidState,
    spec: &BoundarySpec,
    config: &SolverConfig,
    models: &Models,
    dt: f64,
) -> Result<FluidState, SolverError> {
    let mut retries = 0;
    Integrator::new(grid, spec, models, config).step(state, dt, &mut retries)
}

/// Advance `state` to `config.t_end`, calling `observer` on the initial state, every
/// `output_every` steps and at the final time. On error `state` holds the last
/// successfully computed state.
pub fn run(
    grid: &Grid,
    state: &mut FluidState,
    spec: &BoundarySpec,
    config: &SolverConfig,
    models: &Models,
    observer: &mut dyn FnMut(&FluidState, &StepInfo),
) -> Result<RunSummary, SolverError> {
    config.validate(state.t)?;
    let integ = Integrator::new(grid, spec, models, config);
    let mut info = StepInfo { step: 0, t: state.t, dt: 0.0, first_order_retries: 0 };
    observer(state, &info);
    let (mut dt_min, mut dt_max) = (f64::INFINITY, 0.0_f64);
    let eps = 1e-12 * config.t_end.abs().max(1.0);
    while state.t < config.t_end - eps {
        if info.step >= config.max_steps {
            return Err(SolverError::StepLimit(config.max_steps));
        }
        let mut dt = integ.stable_dt(state)?;
        if state.t + dt > config.t_end - eps {
            dt = config.t_end - state.t;
        }
        let mut next = integ.step(state, dt, &mut info.first_order_retries)?;
        if next.t > config.t_end - eps {
            next.t = config.t_end;
        }
        *state = next;
        info.step += 1;
        info.t = state.t;
        info.dt = dt;
        dt_min = dt_min.min(dt);
        dt_max = dt_max.max(dt);
        if info.step.is_multiple_of(config.output_every) || state.t >= config.t_end - eps {
            observer(state, &info);
        }
    }
    Ok(RunSummary {
        steps: info.step,
        t_final: state.t,
        first_order_retries: info.first_order_retries,
        dt_min: if dt_min.is_finite() { dt_min } else { 0.0 },
        dt_max,
    })
}
