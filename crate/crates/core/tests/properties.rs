use plate6::constitutive::{
    check_definiteness, energy_isotropic, from_engineering, identify_coefficients, CosseratParams, EngineeringParams,
};
use plate6::functional::{energy_gradient, retract, total_energy, BoundaryData, BoundaryMode, Gradient, LoadSpec};
use plate6::io::{read_fields, write_fields};
use plate6::kinematics::strain_field;
use plate6::so3::{axl, exp_so3, hat, log_so3, project_so3};
use plate6::solver::random_configuration;
use plate6::{Configuration, Mat3, Material, PlateGrid, Rotation, SurfaceTensor, Vec3};
use proptest::prelude::*;

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-scale..scale).prop_map(|a| Vec3::new(a[0], a[1], a[2]))
}

fn rotation() -> impl Strategy<Value = Rotation> {
    prop::array::uniform3(0.0..1.0f64).prop_map(|[u1, u2, u3]| {
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let (s2, c2) = (u2 * std::f64::consts::TAU).sin_cos();
        let (s3, c3) = (u3 * std::f64::consts::TAU).sin_cos();
        let (w, x, y, z) = (a * s2, a * c2, b * s3, b * c3);
        Rotation::new(Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ))
        .unwrap()
    })
}

fn tensor(scale: f64) -> impl Strategy<Value = SurfaceTensor> {
    prop::array::uniform6(-scale..scale).prop_map(|a| SurfaceTensor::from_stacked(&a))
}

fn engineering() -> impl Strategy<Value = EngineeringParams> {
    (0.1..10.0f64, -0.95..0.49f64, 0.01..0.5f64).prop_map(|(e, nu, h)| EngineeringParams::new(e, nu, h))
}

fn cosserat() -> impl Strategy<Value = CosseratParams> {
    (
        prop::array::uniform4(0.1..10.0f64),
        prop::array::uniform3(0.1..2.0f64),
        0.0..0.5f64,
        0.01..0.5f64,
    )
        .prop_map(|([mu, lambda, mu_c, kappa], [a5, a6, a7], l_c, h)| CosseratParams {
            mu,
            lambda,
            mu_c,
            l_c,
            a4: 0.0,
            a5,
            a6,
            a7,
            p: 1.0,
            q: 0.0,
            kappa,
            h,
        })
}

proptest! {
    #[test]
    fn hat_axl_roundtrip(v in vec3(1e3)) {
        prop_assert_eq!(axl(&hat(&v)).unwrap(), v);
        prop_assert_eq!(hat(&v).transpose(), -hat(&v));
    }

    #[test]
    fn exp_log_roundtrip(v in vec3(1.8)) {
        prop_assume!(v.norm() < std::f64::consts::PI - 1e-3);
        let r = exp_so3(&v);
        prop_assert!(r.drift() <= 1e-12);
        prop_assert!((log_so3(&r).unwrap() - v).norm() <= 1e-9);
        prop_assert!((r.compose(&exp_so3(&-v)).matrix() - Mat3::identity()).amax() <= 1e-14);
    }

    #[test]
    fn projection_fixes_rotations_and_undoes_scaling(r in rotation(), s in 0.5..2.0f64) {
        prop_assert!((project_so3(r.matrix()).unwrap().matrix() - r.matrix()).amax() <= 1e-14);
        prop_assert!((project_so3(&(r.matrix() * s)).unwrap().matrix() - r.matrix()).amax() <= 1e-13);
    }

    #[test]
    fn rigid_motion_leaves_strains_invariant(r in rotation(), c in vec3(5.0), seed in 0u64..1000) {
        let grid = PlateGrid::clamped_square(1.0, 6, 0.1).unwrap();
        let config = random_configuration(&grid, 0.3, seed);
        let a = strain_field(&grid, &config).unwrap();
        let b = strain_field(&grid, &config.rigidly_moved(&r, &c)).unwrap();
        for (x, y) in a.strain.iter().zip(&b.strain).chain(a.bending.iter().zip(&b.bending)) {
            prop_assert!((x.0 - y.0).amax() <= 1e-12);
        }
        let rigid = Configuration::reference(&grid).rigidly_moved(&r, &c);
        let s = strain_field(&grid, &rigid).unwrap();
        for t in s.strain.iter().chain(&s.bending) {
            prop_assert!(t.0.amax() <= 1e-12);
        }
    }

    #[test]
    fn admissible_engineering_energy_is_coercive(ep in engineering(), e in tensor(1.0), k in tensor(1.0)) {
        let m = from_engineering(&ep).unwrap();
        let d = check_definiteness(&m);
        prop_assert!(d.pass);
        let w = energy_isotropic(&e, &k, &m);
        prop_assert!(w.membrane >= d.membrane_constant * e.norm_squared() * (1.0 - 1e-12));
        prop_assert!(w.bending >= d.bending_constant * k.norm_squared() * (1.0 - 1e-12));
    }

    #[test]
    fn quadratic_energy_is_two_homogeneous(ep in engineering(), e in tensor(1.0), k in tensor(1.0), s in -3.0..3.0f64) {
        let m = from_engineering(&ep).unwrap();
        let scaled = SurfaceTensor(e.0 * s);
        let w = energy_isotropic(&e, &k, &m).membrane;
        prop_assert!((energy_isotropic(&scaled, &k, &m).membrane - s * s * w).abs() <= 1e-13 * s * s * w);
    }

    #[test]
    fn cosserat_identification_matches_direct_energy(cp in cosserat(), e in tensor(1.0), k in tensor(5.0)) {
        let m = identify_coefficients(&CosseratParams { kappa: 1.0, ..cp }).unwrap();
        let direct = cp.energy_ek(&e, &k).total();
        let identified = energy_isotropic(&e, &k, &m).total();
        prop_assert!((direct - identified).abs() <= 1e-12 * direct);
        let ulp = f64::from_bits(m.alpha[2].to_bits() + 1) - m.alpha[2];
        prop_assert!(((m.alpha[2] - m.alpha[1]) - 2.0 * cp.h * cp.mu_c).abs() <= ulp);
    }

    #[test]
    fn gradient_predicts_energy_change(seed in 0u64..1000, t in 1e-4..1e-3f64) {
        let grid = PlateGrid::clamped_square(1.0, 5, 0.1).unwrap();
        let material = Material::Isotropic(from_engineering(&EngineeringParams::new(1.0, 0.3, 0.1)).unwrap());
        let loads = LoadSpec::uniform_force(&grid, Vec3::new(0.0, 0.0, 1e-2));
        let config = random_configuration(&grid, 0.2, seed);
        let g = energy_gradient(&grid, &config, &material, &loads).unwrap();
        let mut d = random_configuration(&grid, 1.0, seed + 1).y.iter().enumerate().fold(
            Gradient::zeros(grid.node_count()),
            |mut acc, (n, y)| {
                acc.y[n] = *y - grid.reference_position(n);
                acc.q[n] = Vec3::new(y.z, y.x, y.y);
                acc
            },
        );
        BoundaryData::reference(&grid, BoundaryMode::Clamped).mask(grid.node_count()).apply(&mut d);
        let f = |s: f64| total_energy(&grid, &retract(&config, &d, s), &material, &loads).unwrap().total;
        let fd = (f(t) - f(-t)) / (2.0 * t);
        let exact = g.dot(&d);
        // Central differences are second order in t.
        prop_assert!((fd - exact).abs() <= 1e-3 * exact.abs().max(1e-8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fields_csv_roundtrip_is_exact(seed in 0u64..1000, n in 2usize..7) {
        let grid = PlateGrid::clamped_square(1.0, n, 0.1).unwrap();
        let config = random_configuration(&grid, 0.5, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fields.csv");
        write_fields(&path, &grid, &config).unwrap();
        let back = read_fields(&path, &grid).unwrap();
        prop_assert_eq!(back.y, config.y);
        for (a, b) in back.q.iter().zip(&config.q) {
            prop_assert_eq!(a.matrix(), b.matrix());
        }
    }
}
