use std::f64::consts::PI;

use mhd_core::grid::{
    div, BoundarySpec, Environment, Face, FaceConditions, FaceField, FluidState, Grid, MagneticBc, ScalarData,
    Stagger, ThermalBc, VectorData, VelocityBc,
};
use mhd_core::solver::{run, stable_dt, step, Models, SolverConfig};
use mhd_core::thermo::{EosModel, EosParams, StructuralFunction, TransportModel};

fn faces(velocity: VelocityBc, thermal: ThermalBc) -> FaceConditions {
    FaceConditions { velocity, thermal, magnetic: MagneticBc::NormalNeumann(ScalarData::constant(0.0)) }
}

fn x_dirichlet(mut spec: BoundarySpec) -> BoundarySpec {
    for f in [Face::XLo, Face::XHi] {
        spec.face_mut(f).magnetic = MagneticBc::TangentialDirichlet(VectorData::constant([0.0; 3]));
    }
    spec
}

/// Smooth velocity with zero normal component on every wall.
fn swirl(g: &Grid, amp: f64) -> FaceField {
    FaceField::from_fn(g, |[x, y, z]| {
        [
            amp * (PI * x).sin() * (PI * y).cos() * (2.0 * PI * z).cos(),
            amp * (PI * y).sin() * (PI * z).cos(),
            -amp * (PI * z).sin() * (PI * x).cos(),
        ]
    })
}

#[test]
fn uniform_rest_state_is_a_fixed_point() {
    let g = Grid::cube(8).unwrap();
    // Gravity cancels the centrifugal part so that M is constant; the rotation then
    // acts only through the Coriolis term, which needs momentum.
    let omega = [0.2, -0.1, 0.5];
    let gravity = ScalarData::new("cancel centrifugal", false, move |_, x| {
        let c = [omega[1] * x[2] - omega[2] * x[1], omega[2] * x[0] - omega[0] * x[2], omega[0] * x[1] - omega[1] * x[0]];
        0.7 - 0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2])
    });
    let env = Environment { gravity, omega, total_mass: None };
    let spec = BoundarySpec::uniform(faces(VelocityBc::NoSlip, ThermalBc::Dirichlet(ScalarData::constant(1.3))), env);
    let s0 = FluidState::rest(&g, 0.8, 1.3);
    let cfg = SolverConfig::default();
    let m = Models::default();
    let mut s = s0.clone();
    for _ in 0..5 {
        let dt = stable_dt(&g, &s, &spec, &cfg, &m).unwrap();
        s = step(&g, &s, &spec, &cfg, &m, dt).unwrap();
    }
    let drift = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(drift(s.rho.data(), s0.rho.data()) < 1e-12);
    assert!(drift(s.theta.data(), s0.theta.data()) < 1e-12);
    assert!(s.u.max_abs() < 1e-12);
    assert!(s.b.max_abs() < 1e-12);
}

#[test]
fn mass_and_solenoidality_are_preserved() {
    let g = Grid::cube(8).unwrap();
    let spec = x_dirichlet(BoundarySpec::uniform(faces(VelocityBc::NoSlip, ThermalBc::Insulated), Environment::default()));
    let mut s = FluidState::rest(&g, 1.0, 1.0);
    s.rho = mhd_core::grid::CellField::from_fn(&g, |[x, y, z]| 1.0 + 0.2 * x * y + 0.1 * z);
    s.u = swirl(&g, 0.3);
    s.b = FaceField::from_fn(&g, |_| [0.4, 0.0, 0.0]);
    let m0 = s.mass(&g);
    let cfg = SolverConfig { t_end: 0.2, ..SolverConfig::default() };
    let mut max_div = 0.0_f64;
    run(&g, &mut s, &spec, &cfg, &Models::default(), &mut |st, _| {
        max_div = max_div.max(div(&g, &st.b).unwrap().max_abs());
    })
    .unwrap();
    assert!(((s.mass(&g) - m0) / m0).abs() < 1e-12);
    assert!(max_div < 1e-12, "{max_div}");
    assert!(s.theta.min() > 0.0);
}

#[test]
fn resistive_decay_matches_heat_kernel() {
    // B = (0, 0, sin x) on [0, π] with tangential data following the exact decay
    // exp(−ζ t) on the y walls and zero tangential field on the others.
    let h = PI / 32.0;
    let g = Grid::new([32, 4, 4], [PI, 4.0 * h, 4.0 * h]).unwrap();
    let zeta = 1.0;
    let mut spec = BoundarySpec::uniform(
        FaceConditions {
            velocity: VelocityBc::Slip,
            thermal: ThermalBc::Insulated,
            magnetic: MagneticBc::TangentialDirichlet(VectorData::constant([0.0; 3])),
        },
        Environment::default(),
    );
    for (f, sign) in [(Face::YLo, 1.0), (Face::YHi, -1.0)] {
        spec.face_mut(f).magnetic =
            MagneticBc::TangentialDirichlet(VectorData::new("decaying", true, move |t, x| {
                [sign * x[0].sin() * (-zeta * t).exp(), 0.0, 0.0]
            }));
    }
    // A heavy ideal gas keeps the Lorentz-driven flow negligible.
    let mut s = FluidState::rest(&g, 1e6, 1.0);
    s.b = FaceField::from_fn(&g, |x| [0.0, 0.0, x[0].sin()]);
    let eos = EosModel::new(EosParams { structural: StructuralFunction::Ideal, ..EosParams::default() }).unwrap();
    let models = Models { eos, transport: TransportModel::new(0.0, 0.0, 0.0, 6.5, zeta / 2.0) };
    let cfg = SolverConfig { t_end: 0.5, heating_on: false, cfl: 0.5, ..SolverConfig::default() };
    let probe = |st: &FluidState| st.b.c[2].get(16, 2, 2);
    let b0 = probe(&s);
    run(&g, &mut s, &spec, &cfg, &models, &mut |_, _| {}).unwrap();
    // The discrete decay rate of sin x is (2/h)² sin²(h/2), within 0.1% of 1.
    let rate = -(probe(&s) / b0).ln() / 0.5;
    assert!((rate - zeta).abs() < 0.01, "rate {rate}");
}

#[test]
fn finer_grids_take_smaller_steps() {
    let spec = BoundarySpec::uniform(faces(VelocityBc::NoSlip, ThermalBc::Insulated), Environment::default());
    let cfg = SolverConfig { dt_max: 1.0, ..SolverConfig::default() };
    let m = Models::default();
    let dt = |n: usize| {
        let g = Grid::cube(n).unwrap();
        let mut s = FluidState::rest(&g, 1.0, 1.0);
        s.u = swirl(&g, 0.1);
        stable_dt(&g, &s, &spec, &cfg, &m).unwrap()
    };
    let (d8, d16) = (dt(8), dt(16));
    let ratio = d8 / d16;
    assert!((1.9..=4.1).contains(&ratio), "{ratio}");
}

#[test]
fn faster_flow_never_enlarges_the_step() {
    let g = Grid::cube(8).unwrap();
    let spec = BoundarySpec::uniform(faces(VelocityBc::NoSlip, ThermalBc::Insulated), Environment::default());
    let cfg = SolverConfig { dt_max: 1.0, ..SolverConfig::default() };
    let m = Models::default();
    let mut prev = f64::INFINITY;
    for amp in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let mut s = FluidState::rest(&g, 1.0, 1.0);
        s.u = swirl(&g, amp);
        let dt = stable_dt(&g, &s, &spec, &cfg, &m).unwrap();
        assert!(dt <= prev);
        prev = dt;
    }
}

#[test]
fn rest_without_diffusion_uses_dt_max() {
    let g = Grid::cube(4).unwrap();
    let spec = BoundarySpec::uniform(faces(VelocityBc::NoSlip, ThermalBc::Insulated), Environment::default());
    let cfg = SolverConfig { dt_max: 1e-4, ..SolverConfig::default() };
    let m = Models { transport: TransportModel::new(0.0, 0.0, 0.0, 6.5, 0.0), ..Models::default() };
    let s = FluidState::rest(&g, 1.0, 1.0);
    assert_eq!(stable_dt(&g, &s, &spec, &cfg, &m).unwrap(), 1e-4);
    let _ = Stagger::Cell;
}

#[test]
fn zero_length_run_emits_one_record() {
    let g = Grid::cube(4).unwrap();
    let spec = BoundarySpec::uniform(faces(VelocityBc::NoSlip, ThermalBc::Insulated), Environment::default());
    let mut s = FluidState::rest(&g, 1.0, 1.0);
    let s0 = s.clone();
    let cfg = SolverConfig { t_end: 0.0, ..SolverConfig::default() };
    let mut count = 0;
    run(&g, &mut s, &spec, &cfg, &Models::default(), &mut |_, _| count += 1).unwrap();
    assert_eq!(count, 1);
    assert_eq!(s, s0);
}

fn restart_setup() -> (Grid, BoundarySpec, FluidState) {
    let g = Grid::cube(8).unwrap();
    let spec = x_dirichlet(BoundarySpec::uniform(
        faces(VelocityBc::NoSlip, ThermalBc::Dirichlet(ScalarData::constant(1.0))),
        Environment::default(),
    ));
    let mut s = FluidState::rest(&g, 1.0, 1.0);
    s.theta = mhd_core::grid::CellField::from_fn(&g, |[x, y, z]| 1.0 + 0.3 * (PI * x).sin() * (PI * y).sin() * z);
    s.u = swirl(&g, 0.2);
    s.b = FaceField::from_fn(&g, |_| [0.3, 0.0, 0.0]);
    (g, spec, s)
}

#[test]
fn resumed_steps_match_unbroken_steps() {
    let (g, spec, s0) = restart_setup();
    let cfg = SolverConfig::default();
    let m = Models::default();
    let dt = 0.5 * stable_dt(&g, &s0, &spec, &cfg, &m).unwrap();
    let advance = |mut s: FluidState, k: usize| {
        for _ in 0..k {
            s = step(&g, &s, &spec, &cfg, &m, dt).unwrap();
        }
        s
    };
    let unbroken = advance(s0.clone(), 12);

    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("half");
    mhd_core::grid::dump::write_dump(&stem, &g, &advance(s0, 6), None).unwrap();
    let (g2, s_half) = mhd_core::grid::dump::read_dump(&stem).unwrap();
    assert_eq!(g, g2);
    assert_eq!(advance(s_half, 6), unbroken);
}

#[test]
fn resumed_run_matches_unbroken_run() {
    let (g, spec, s0) = restart_setup();
    let m = Models::default();
    // A binding step cap keeps both schedules on the same grid of times.
    let cfg = |t_end| SolverConfig { dt_max: 0.0025, t_end, ..SolverConfig::default() };
    assert!(stable_dt(&g, &s0, &spec, &cfg(1.0), &m).unwrap() == 0.0025);

    let mut unbroken = s0.clone();
    run(&g, &mut unbroken, &spec, &cfg(0.05), &m, &mut |_, _| {}).unwrap();

    let mut first = s0;
    run(&g, &mut first, &spec, &cfg(0.025), &m, &mut |_, _| {}).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("restart");
    mhd_core::grid::dump::write_dump(&stem, &g, &first, None).unwrap();
    let (_, mut resumed) = mhd_core::grid::dump::read_dump(&stem).unwrap();
    run(&g, &mut resumed, &spec, &cfg(0.05), &m, &mut |_, _| {}).unwrap();

    let drift = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    assert!((resumed.t - unbroken.t).abs() < 1e-14);
    assert!(drift(resumed.rho.data(), unbroken.rho.data()) < 1e-12);
    assert!(drift(resumed.theta.data(), unbroken.theta.data()) < 1e-12);
    for a in 0..3 {
        assert!(drift(resumed.u.c[a].data(), unbroken.u.c[a].data()) < 1e-12);
        assert!(drift(resumed.b.c[a].data(), unbroken.b.c[a].data()) < 1e-12);
    }
}
