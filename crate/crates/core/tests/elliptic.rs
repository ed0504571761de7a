use mhd_core::elliptic::{
    bogovskii, combined_extension, default_delta0, harmonic_extension_temperature, harmonic_space, poincare_constant,
    poisson_mixed, project_off_harmonic, stationarity_test, tangential_extension, CellMask, EllipticError,
    FaceCondition, HarmonicBasis, SolverOptions,
};
use mhd_core::grid::{
    curl_face_to_edge, div, face_inner, Array3, BoundarySpec, CellField, EdgeField, Environment, Face,
    FaceConditions, FaceField, Grid, MagneticBc, ScalarData, Stagger, ThermalBc, VectorData, VelocityBc,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{dense_bogovskii, dense_poisson, face_len};

const PI: f64 = std::f64::consts::PI;

fn tight() -> SolverOptions {
    SolverOptions { tol: 1e-12, ..Default::default() }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn random_face_values(g: &Grid, f: Face, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..face_len(g, f)).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn zero_mean(mut v: Vec<f64>) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
    v
}

#[test]
fn poisson_constant_dirichlet_gives_constant() {
    let g = Grid::cube(8).unwrap();
    let faces = Face::ALL.map(|f| FaceCondition::Dirichlet(vec![3.0; face_len(&g, f)]));
    let (phi, stats) = poisson_mixed(&g, &CellField::zeros(&g), &faces, tight()).unwrap();
    assert!(phi.data().iter().all(|v| (v - 3.0).abs() < 1e-9), "{}", stats.residual);
}

#[test]
fn poisson_two_face_data_give_linear_profile() {
    for n in [8, 16] {
        let g = Grid::cube(n).unwrap();
        let faces = Face::ALL.map(|f| match f {
            Face::XLo => FaceCondition::Dirichlet(vec![0.0; face_len(&g, f)]),
            Face::XHi => FaceCondition::Dirichlet(vec![1.0; face_len(&g, f)]),
            _ => FaceCondition::homogeneous_neumann(&g, f),
        });
        let (phi, _) = poisson_mixed(&g, &CellField::zeros(&g), &faces, tight()).unwrap();
        let exact = CellField::from_fn(&g, |p| p[0]);
        let err = phi.data().iter().zip(exact.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let h = 1.0 / n as f64;
        assert!(err < h * h, "n = {n}: {err}");
    }
}

#[test]
fn poisson_matches_dense_solve_on_mixed_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = Grid::new([8, 8, 8], [1.0, 1.2, 0.8]).unwrap();
    let rhs = CellField(Array3::from_fn(g.n(), |_| rng.gen_range(-1.0..1.0)));
    let faces = Face::ALL.map(|f| {
        let v = random_face_values(&g, f, &mut rng);
        if f.axis() == 0 {
            FaceCondition::Dirichlet(v)
        } else {
            FaceCondition::Neumann(v)
        }
    });
    let (phi, _) = poisson_mixed(&g, &rhs, &faces, tight()).unwrap();
    let (a, b) = dense_poisson(&g, &rhs, &faces);
    let oracle = a.lu().solve(&b).unwrap();
    let scale = oracle.amax();
    let err = phi.data().iter().zip(oracle.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8 * scale, "{err} vs scale {scale}");
}

#[test]
fn poisson_residual_on_compatible_neumann_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = Grid::cube(16).unwrap();
    let rhs = CellField(Array3::from_vec(g.n(), zero_mean((0..g.cell_count()).map(|_| rng.gen_range(-1.0..1.0)).collect())).unwrap());
    let faces = Face::ALL.map(|f| FaceCondition::Neumann(zero_mean(random_face_values(&g, f, &mut rng))));
    let (phi, _) = poisson_mixed(&g, &rhs, &faces, tight()).unwrap();
    let (a, b) = dense_poisson(&g, &rhs, &faces);
    let x = DVector::from_iterator(g.cell_count(), phi.data().iter().copied());
    let residual = (&a * &x - &b).norm() / b.norm();
    assert!(residual < 1e-10, "{residual}");
    let mean = phi.data().iter().sum::<f64>() / g.cell_count() as f64;
    assert!(mean.abs() < 1e-12);
}

#[test]
fn poisson_rejects_incompatible_neumann_data() {
    let g = Grid::cube(6).unwrap();
    let faces = Face::ALL.map(|f| FaceCondition::homogeneous_neumann(&g, f));
    let err = poisson_mixed(&g, &CellField::constant(&g, 1.0), &faces, SolverOptions::default()).unwrap_err();
    match err {
        EllipticError::Incompatible { defect } => assert!((defect.abs() - 1.0).abs() < 1e-12, "{defect}"),
        e => panic!("unexpected {e}"),
    }
}

fn thermal_spec(data: impl Fn(Face) -> ThermalBc) -> BoundarySpec {
    let mut s = BoundarySpec::uniform(
        FaceConditions {
            velocity: VelocityBc::NoSlip,
            thermal: ThermalBc::Insulated,
            magnetic: MagneticBc::NormalNeumann(ScalarData::constant(0.0)),
        },
        Environment::default(),
    );
    for f in Face::ALL {
        s.face_mut(f).thermal = data(f);
    }
    s
}

#[test]
fn temperature_extension_examples() {
    let g = Grid::cube(10).unwrap();
    let constant = thermal_spec(|_| ThermalBc::Dirichlet(ScalarData::constant(2.0)));
    let th = harmonic_extension_temperature(&g, &constant, 0.0, tight()).unwrap();
    assert!(th.data().iter().all(|v| (v - 2.0).abs() < 1e-9));

    let linear = thermal_spec(|f| match f {
        Face::XLo => ThermalBc::Dirichlet(ScalarData::constant(1.0)),
        Face::XHi => ThermalBc::Dirichlet(ScalarData::constant(2.0)),
        _ => ThermalBc::Insulated,
    });
    let th = harmonic_extension_temperature(&g, &linear, 0.0, tight()).unwrap();
    let exact = CellField::from_fn(&g, |p| 1.0 + p[0]);
    assert!(th.data().iter().zip(exact.data()).all(|(a, b)| (a - b).abs() < 1e-8));

    let insulated = thermal_spec(|_| ThermalBc::Insulated);
    assert!(matches!(
        harmonic_extension_temperature(&g, &insulated, 0.0, tight()),
        Err(EllipticError::NoDirichletTemperature)
    ));
}

#[test]
fn temperature_extension_respects_minimum_of_data() {
    let g = Grid::cube(12).unwrap();
    let bumpy = ScalarData::new("bumpy", true, |t, p| {
        0.05 + 0.5 * (1.0 + (3.0 * p[0] + t).sin() * (5.0 * p[1]).cos() * (2.0 * p[2]).sin())
    });
    let spec = thermal_spec(|f| if f == Face::YLo { ThermalBc::Insulated } else { ThermalBc::Dirichlet(bumpy.clone()) });
    for t in [0.0, 0.7] {
        let th = harmonic_extension_temperature(&g, &spec, t, tight()).unwrap();
        let lo = Face::ALL
            .iter()
            .filter(|f| **f != Face::YLo)
            .flat_map(|&f| {
                let a = f.axis();
                let (b, c) = Grid::tangential_axes(a);
                let mut pts = Vec::new();
                for jc in 0..g.n()[c] {
                    for jb in 0..g.n()[b] {
                        let mut p = [0.0; 3];
                        p[a] = g.wall(a, f.side());
                        p[b] = (jb as f64 + 0.5) * g.h()[b];
                        p[c] = (jc as f64 + 0.5) * g.h()[c];
                        pts.push(bumpy.eval(t, p));
                    }
                }
                pts
            })
            .fold(f64::INFINITY, f64::min);
        assert!(th.min() >= lo - 1e-9, "{} < {lo}", th.min());
        assert!(th.min() > 0.0);
    }
}

fn sine_rhs(g: &Grid) -> CellField {
    CellField::from_fn(g, |p| (2.0 * PI * p[0]).sin())
}

fn walls_are_zero(g: &Grid, v: &FaceField) -> bool {
    (0..3).all(|a| v.c[a].indices().all(|idx| !(idx[a] == 0 || idx[a] == g.n()[a]) || v.c[a].get(idx[0], idx[1], idx[2]) == 0.0))
}

#[test]
fn bogovskii_of_zero_is_zero() {
    let g = Grid::cube(6).unwrap();
    let r = bogovskii(&g, &CellField::zeros(&g), &CellMask::full(&g), SolverOptions::default()).unwrap();
    assert_eq!(r.field.max_abs(), 0.0);
}

#[test]
fn bogovskii_matches_dense_saddle_point_solve() {
    let g = Grid::cube(8).unwrap();
    let f = sine_rhs(&g);
    let r = bogovskii(&g, &f, &CellMask::full(&g), tight()).unwrap();
    let d = div(&g, &r.field).unwrap();
    let res = d.data().iter().zip(f.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(res < 1e-8, "div residual {res}");
    assert!(walls_are_zero(&g, &r.field));

    let oracle = dense_bogovskii(&g, &f);
    let mut diff = r.field.clone();
    diff.axpy(-1.0, &oracle);
    let rel = face_inner(&g, &diff, &diff).sqrt() / face_inner(&g, &oracle, &oracle).sqrt();
    assert!(rel < 1e-6, "relative difference {rel}");
}

#[test]
fn bogovskii_constant_is_mesh_stable() {
    let c: Vec<f64> = [8, 16, 24]
        .iter()
        .map(|&n| {
            let g = Grid::cube(n).unwrap();
            bogovskii(&g, &sine_rhs(&g), &CellMask::full(&g), SolverOptions::default()).unwrap().constant
        })
        .collect();
    for w in c.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.2, "{c:?}");
    }
}

#[test]
fn bogovskii_rejects_bad_input() {
    let g = Grid::cube(6).unwrap();
    let full = CellMask::full(&g);
    let err = bogovskii(&g, &CellField::constant(&g, 1.0), &full, SolverOptions::default()).unwrap_err();
    assert!(matches!(err, EllipticError::NonzeroMean { mean } if (mean - 1.0).abs() < 1e-12));
    let split = CellMask::from_fn(&g, |idx| idx[0] < 2 || idx[0] > 3);
    let err = bogovskii(&g, &CellField::zeros(&g), &split, SolverOptions::default()).unwrap_err();
    assert!(matches!(err, EllipticError::DisconnectedMask { components: 2 }));
}

/// Neumann-zero box with tangential data `b_τ` on the top face.
fn top_dirichlet(data: VectorData) -> BoundarySpec {
    let mut s = thermal_spec(|_| ThermalBc::Dirichlet(ScalarData::constant(1.0)));
    s.face_mut(Face::ZHi).magnetic = MagneticBc::TangentialDirichlet(data);
    s
}

fn smooth_top_data() -> VectorData {
    VectorData::new("smooth", false, |_, p| [(PI * p[0]).sin() * (PI * p[1]).cos(), 0.5 + p[0] * p[1], 0.0])
}

fn max_div(g: &Grid, v: &FaceField) -> f64 {
    div(g, v).unwrap().max_abs()
}

#[test]
fn tangential_extension_examples() {
    let g = Grid::cube(16).unwrap();
    let zero = top_dirichlet(VectorData::constant([0.0; 3]));
    let d0 = default_delta0(&g, &zero);
    assert_eq!(tangential_extension(&g, &zero, 0.0, 0.5 * d0, None, tight()).unwrap().max_abs(), 0.0);
    assert!(matches!(
        tangential_extension(&g, &zero, 0.0, 2.0 * d0, None, tight()),
        Err(EllipticError::DeltaOutOfRange { .. })
    ));

    let spec = top_dirichlet(smooth_top_data());
    let norms: Vec<f64> = [0.4, 0.2, 0.1]
        .iter()
        .map(|s| {
            let v = tangential_extension(&g, &spec, 0.0, s * d0, None, tight()).unwrap();
            assert!(max_div(&g, &v) < 1e-8);
            // Nothing outside the collar below the top face.
            for a in 0..3 {
                for idx in v.c[a].indices() {
                    let z = g.position(Stagger::Face(a), idx)[2];
                    if z < 1.0 - d0 - g.h()[2] {
                        assert_eq!(v.c[a].get(idx[0], idx[1], idx[2]), 0.0);
                    }
                }
            }
            face_inner(&g, &v, &v).sqrt()
        })
        .collect();
    assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
}

#[test]
fn tangential_extension_is_solenoidal_for_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let g = Grid::cube(12).unwrap();
    for _ in 0..3 {
        let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let k: [f64; 4] = std::array::from_fn(|_| rng.gen_range(1.0..4.0));
        let data = VectorData::new("random", false, move |_, p| {
            [c[0] * (k[0] * p[0]).sin() + c[1] * p[1], c[2] * (k[1] * p[1]).cos() + c[3] * (k[2] * p[0]).sin(), 0.0]
                .map(|v| v + c[4] * (k[3] * (p[0] + p[1])).cos() * c[5])
        });
        let mut spec = top_dirichlet(data.clone());
        spec.face_mut(Face::ZLo).magnetic = MagneticBc::TangentialDirichlet(data);
        let d0 = default_delta0(&g, &spec);
        let v = tangential_extension(&g, &spec, 0.0, 0.5 * d0, None, tight()).unwrap();
        assert!(max_div(&g, &v) < 1e-8, "{}", max_div(&g, &v));
    }
}

/// Boundary data of a uniform field `b0` on every face, Dirichlet on the x and y faces.
fn uniform_field_spec(b0: [f64; 3]) -> BoundarySpec {
    let mut s = thermal_spec(|_| ThermalBc::Dirichlet(ScalarData::constant(1.0)));
    for f in Face::ALL {
        let nrm = f.normal();
        s.face_mut(f).magnetic = if f.axis() == 2 {
            MagneticBc::NormalNeumann(ScalarData::constant(b0.iter().zip(nrm).map(|(a, b)| a * b).sum()))
        } else {
            MagneticBc::TangentialDirichlet(VectorData::constant(cross(b0, nrm)))
        };
    }
    s
}

fn interior_curl(g: &Grid, v: &FaceField) -> EdgeField {
    let mut c = curl_face_to_edge(g, v).unwrap();
    for a in 0..3 {
        for idx in c.c[a].indices().collect::<Vec<_>>() {
            if (0..3).any(|b| b != a && (idx[b] == 0 || idx[b] == g.n()[b])) {
                c.c[a].set(idx[0], idx[1], idx[2], 0.0);
            }
        }
    }
    c
}

#[test]
fn combined_extension_of_zero_data_is_zero() {
    let g = Grid::cube(8).unwrap();
    let ext = combined_extension(&g, &uniform_field_spec([0.0; 3]), 0.0, None, tight()).unwrap();
    assert_eq!(ext.b_total.max_abs(), 0.0);
    assert_eq!(ext.b_normal.max_abs(), 0.0);
    assert_eq!(ext.b_tangential.max_abs(), 0.0);
}

#[test]
fn combined_extension_recovers_uniform_field() {
    let g = Grid::cube(10).unwrap();
    let ext = combined_extension(&g, &uniform_field_spec([0.0, 0.0, 1.0]), 0.0, None, tight()).unwrap();
    assert!(ext.stationary);
    let target = FaceField::from_fn(&g, |_| [0.0, 0.0, 1.0]);
    let mut diff = ext.b_total.clone();
    diff.axpy(-1.0, &target);
    assert!(diff.max_abs() < 1e-6, "{}", diff.max_abs());
    assert!(interior_curl(&g, &ext.b_total).max_abs() < 1e-6);
    assert!(ext.theta_tilde.unwrap().data().iter().all(|v| (v - 1.0).abs() < 1e-9));
}

/// Top-face swirl `b_τ = (y−y₀, −(x−x₀), 0) × n`, whose tangential divergence is −2.
fn swirl(face: Face, centre: [f64; 3]) -> VectorData {
    VectorData::new("swirl", false, move |_, p| {
        let a = face.axis();
        let (b, c) = Grid::tangential_axes(a);
        let mut t = [0.0; 3];
        t[b] = p[c] - centre[c];
        t[c] = -(p[b] - centre[b]);
        cross(t, face.normal())
    })
}

#[test]
fn combined_extension_curl_comes_from_tangential_part() {
    let g = Grid::cube(12).unwrap();
    let mut spec = top_dirichlet(swirl(Face::ZHi, [0.5; 3]));
    spec.face_mut(Face::ZLo).magnetic = MagneticBc::NormalNeumann(ScalarData::new("bump", false, |_, p| {
        (PI * p[0]).cos() * (PI * p[1]).cos()
    }));
    let ext = combined_extension(&g, &spec, 0.0, None, tight()).unwrap();
    assert!(!ext.stationary);
    let total = interior_curl(&g, &ext.b_total);
    let tang = interior_curl(&g, &ext.b_tangential);
    let scale = tang.max_abs();
    assert!(scale > 0.1);
    for a in 0..3 {
        for (x, y) in total.c[a].data().iter().zip(tang.c[a].data()) {
            assert!((x - y).abs() < 1e-8 * scale, "{x} vs {y}");
        }
    }
    assert!(max_div(&g, &ext.b_total) < 1e-8);
}

#[test]
fn combined_extension_is_linear_in_data() {
    let g = Grid::cube(10).unwrap();
    let spec = top_dirichlet(smooth_top_data());
    let base = combined_extension(&g, &spec, 0.0, None, tight()).unwrap();
    for alpha in [-2.5, 0.3, 7.0] {
        let scaled = combined_extension(&g, &spec.scale_magnetic(alpha), 0.0, None, tight()).unwrap();
        let mut diff = scaled.b_total.clone();
        diff.axpy(-alpha, &base.b_total);
        let rel = face_inner(&g, &diff, &diff).sqrt() / (alpha.abs() * face_inner(&g, &base.b_total, &base.b_total).sqrt());
        assert!(rel < 1e-9, "alpha {alpha}: {rel}");
    }
}

#[test]
fn stationarity_examples() {
    let g = Grid::cube(10).unwrap();
    let uniform = stationarity_test(&g, &uniform_field_spec([0.3, -0.2, 1.0]), 0.0, tight());
    assert!(uniform.stationary, "{}", uniform.max_tangential_divergence);

    let swirled = stationarity_test(&g, &top_dirichlet(swirl(Face::ZHi, [0.5; 3])), 0.0, tight());
    assert!(!swirled.stationary);
    let w = swirled.witness.iter().find(|w| w.face == Face::ZHi).expect("top face witness");
    assert!(w.values.iter().all(|v| (v + 2.0).abs() < 1e-10), "{:?}", &w.values[..4]);

    // n × ∇_τ(x² − y²) on the top face is divergence free on the surface.
    let rotated = VectorData::new("rotated gradient", false, |_, p| cross([0.0, 0.0, 1.0], [2.0 * p[0], -2.0 * p[1], 0.0]));
    let v = stationarity_test(&g, &top_dirichlet(rotated), 0.0, tight());
    assert!(v.max_tangential_divergence <= v.divergence_tolerance, "{}", v.max_tangential_divergence);
}

#[test]
fn stationarity_is_invariant_under_axis_relabelling() {
    let g = Grid::cube(8).unwrap();
    let on_z = stationarity_test(&g, &top_dirichlet(swirl(Face::ZHi, [0.4, 0.5, 0.6])), 0.0, tight());
    let mut on_x = thermal_spec(|_| ThermalBc::Dirichlet(ScalarData::constant(1.0)));
    on_x.face_mut(Face::XHi).magnetic = MagneticBc::TangentialDirichlet(swirl(Face::XHi, [0.6, 0.4, 0.5]));
    let on_x = stationarity_test(&g, &on_x, 0.0, tight());
    assert_eq!(on_z.stationary, on_x.stationary);
    assert!((on_z.max_tangential_divergence - on_x.max_tangential_divergence).abs() < 1e-12);

    let ok_z = stationarity_test(&g, &uniform_field_spec([0.0, 0.0, 1.0]), 0.0, tight());
    let mut ok_x = thermal_spec(|_| ThermalBc::Dirichlet(ScalarData::constant(1.0)));
    for f in Face::ALL {
        ok_x.face_mut(f).magnetic = if f.axis() == 0 {
            MagneticBc::NormalNeumann(ScalarData::constant(f.normal()[0]))
        } else {
            MagneticBc::TangentialDirichlet(VectorData::constant(cross([1.0, 0.0, 0.0], f.normal())))
        };
    }
    let ok_x = stationarity_test(&g, &ok_x, 0.0, tight());
    assert!(ok_z.stationary && ok_x.stationary);
}

fn dirichlet_on(faces: &[Face]) -> BoundarySpec {
    let mut s = thermal_spec(|_| ThermalBc::Dirichlet(ScalarData::constant(1.0)));
    for f in faces {
        s.face_mut(*f).magnetic = MagneticBc::TangentialDirichlet(VectorData::constant([0.0; 3]));
    }
    s
}

#[test]
fn harmonic_space_of_simply_connected_arrangements_is_trivial() {
    let g = Grid::cube(8).unwrap();
    for faces in [&[][..], &[Face::XLo][..], &[Face::XLo, Face::YLo][..], &[Face::XLo, Face::YLo, Face::ZHi][..]] {
        assert_eq!(harmonic_space(&g, &dirichlet_on(faces)).unwrap().dim(), 0, "{faces:?}");
    }
}

#[test]
fn harmonic_dimension_is_mesh_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..3 {
        let faces: Vec<Face> = Face::ALL.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let spec = dirichlet_on(&faces);
        let d8 = harmonic_space(&Grid::cube(8).unwrap(), &spec).unwrap().dim();
        let d12 = harmonic_space(&Grid::cube(12).unwrap(), &spec).unwrap().dim();
        assert_eq!(d8, d12, "{faces:?}");
    }
}

fn random_face_field(g: &Grid, rng: &mut ChaCha8Rng) -> FaceField {
    let mut v = FaceField::zeros(g);
    for a in 0..3 {
        for x in v.c[a].data_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    v
}

#[test]
fn projection_off_harmonic_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let g = Grid::cube(8).unwrap();
    let b = random_face_field(&g, &mut rng);
    assert_eq!(project_off_harmonic(&g, &b, &HarmonicBasis::empty()), b);

    let basis = harmonic_space(&g, &dirichlet_on(&[Face::XLo, Face::XHi])).unwrap();
    assert_eq!(basis.dim(), 1);
    let p = project_off_harmonic(&g, &b, &basis);
    for h in &basis.fields {
        assert!(face_inner(&g, &p, h).abs() < 1e-12);
    }
    let pp = project_off_harmonic(&g, &p, &basis);
    let mut diff = pp.clone();
    diff.axpy(-1.0, &p);
    assert!(diff.max_abs() < 1e-13);
}

#[test]
fn poincare_constant_examples() {
    let spec = dirichlet_on(&[Face::ZLo, Face::ZHi]);
    let c: Vec<f64> = [8, 16]
        .iter()
        .map(|&n| {
            let g = Grid::cube(n).unwrap();
            let basis = harmonic_space(&g, &spec).unwrap();
            let c = poincare_constant(&g, &spec, &basis).unwrap();
            assert!(c.is_finite() && c > 0.0);
            c
        })
        .collect();
    assert!((c[1] / c[0] - 1.0).abs() < 0.1, "{c:?}");

    // Harmonic components do not change the curl.
    let g = Grid::cube(8).unwrap();
    let basis = harmonic_space(&g, &spec).unwrap();
    assert_eq!(basis.dim(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let b = random_face_field(&g, &mut rng);
    let mut bh = b.clone();
    bh.axpy(3.0, &basis.fields[0]);
    let (c0, c1) = (interior_curl(&g, &b), interior_curl(&g, &bh));
    let norm = |c: &EdgeField| (0..3).map(|a| c.c[a].data().iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
    assert!((norm(&c1) - norm(&c0)).abs() < 1e-6 * norm(&c0));
}
