mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rotbec::cgpe::{CgpeParams, CgpeSolver};
use rotbec::grid::{dst_forward, dst_inverse, inner_product, BoxDomain, ComplexField, GridSpec};
use rotbec::rotating::{map_point, phase_integral, rotation_matrix, Direction, HarmonicTrap, PotentialSpec};
use rotbec::state::CoupledState;

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    (2usize..=10, 2usize..=10, -5.0..0.0f64, 0.5..6.0f64).prop_map(|(a, b, lo, len)| {
        GridSpec::new(BoxDomain::new(&[(lo, lo + len), (lo * 0.5, lo * 0.5 + len * 1.3)]).unwrap(), &[2 * a, 2 * b])
            .unwrap()
    })
}

fn field_strategy() -> impl Strategy<Value = ComplexField> {
    (grid_strategy(), any::<u64>()).prop_map(|(g, seed)| common::random_field(&g, &mut common::rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(f in field_strategy()) {
        let back = dst_inverse(&dst_forward(&f).unwrap());
        prop_assert!(back.max_abs_diff(&f) <= 1e-12);
    }

    #[test]
    fn transform_is_a_scaled_isometry(f in field_strategy()) {
        let g = f.grid();
        let norm = inner_product(&f, &f).unwrap().re;
        let coeffs: f64 = dst_forward(&f).unwrap().modes().map(|(_, c)| c.norm_sqr()).sum();
        let scale = g.cell_volume() * (g.cells(0) * g.cells(1)) as f64 / 4.0;
        prop_assert!((norm - coeffs * scale).abs() <= 1e-10 * norm);
    }

    #[test]
    fn rotation_is_orthogonal(t in -100.0..100.0f64, omega in -3.0..3.0f64, dim in 2usize..=3) {
        let a = rotation_matrix(t, omega, dim);
        let err = (a.transpose() * &a - DMatrix::identity(dim, dim)).amax();
        prop_assert!(err <= 1e-15);
        prop_assert!((a.determinant() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn map_point_round_trip(x in -20.0..20.0f64, y in -20.0..20.0f64, t in 0.0..50.0f64, omega in -2.0..2.0f64) {
        let p = [x, y];
        let back = map_point(&map_point(&p, t, omega, Direction::ToEulerian), t, omega, Direction::ToLagrangian);
        prop_assert!((back[0] - x).abs() <= 1e-13 && (back[1] - y).abs() <= 1e-13);
    }

    #[test]
    fn phase_integral_additivity(
        gx in 0.5..1.5f64, gy in 0.5..1.5f64, omega in -1.0..1.0f64,
        x in -8.0..8.0f64, y in -8.0..8.0f64,
        t0 in 0.0..10.0f64, d1 in 0.0..0.5f64, d2 in 0.0..0.5f64,
    ) {
        let spec: PotentialSpec = HarmonicTrap::new(gx, gy).unwrap().into();
        let p = [x, y];
        let whole = phase_integral(&spec, &p, t0, t0 + d1 + d2, omega).unwrap();
        let parts = phase_integral(&spec, &p, t0, t0 + d1, omega).unwrap()
            + phase_integral(&spec, &p, t0 + d1, t0 + d1 + d2, omega).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn strang_step_is_an_isometry(
        seed in any::<u64>(),
        lambda in -2.0..2.0f64,
        omega in -1.0..1.0f64,
        b11 in 0.0..100.0f64, b12 in 0.0..100.0f64, b22 in 0.0..100.0f64,
        gx in 0.8..1.2f64, gy in 0.8..1.2f64,
        dt in 1e-4..1e-2f64,
    ) {
        let g = common::square_grid(16, -4.0, 4.0);
        let mut r = common::rng(seed);
        let fields = vec![common::random_field(&g, &mut r), common::random_field(&g, &mut r)];
        let mut s = CoupledState::new(fields, 0.0).unwrap();
        let trap: PotentialSpec = HarmonicTrap::new(gx, gy).unwrap().into();
        let params = CgpeParams {
            lambda,
            omega,
            beta: [[b11, b12], [b12, b22]],
            dt,
            potentials: [trap.clone(), HarmonicTrap::new(1.0, 1.0).unwrap().into()],
        };
        let mut solver = CgpeSolver::new(&g, params).unwrap();
        let n0 = s.total_mass();
        for _ in 0..3 {
            solver.strang_step(&mut s).unwrap();
            prop_assert!((s.total_mass() - n0).abs() <= 1e-12 * n0);
        }
        prop_assert!(s.components().iter().all(|c| c.max_boundary_abs() == 0.0));
    }
}
