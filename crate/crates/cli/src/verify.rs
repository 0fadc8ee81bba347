//! Oracle cross-checks and invariants, each reduced to one deviation
//! compared against a tolerance.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotbec::cgpe::{CgpeParams, CgpeSolver};
use rotbec::grid::{dst_forward, dst_inverse, BoxDomain, ComplexField, GridSpec};
use rotbec::oracle::rk4_reference;
use rotbec::output::eulerian_frame;
use rotbec::rotating::{phase_integral, rotation_matrix, simpson, HarmonicTrap, PotentialSpec};
use rotbec::state::CoupledState;
use rotbec::vgpe::{Drive, Envelope, VgpeParams, VgpeSolver};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.deviation,
            self.tolerance
        )
    }
}

fn square(n: usize, half: f64) -> GridSpec {
    GridSpec::new(BoxDomain::square(-half, half).expect("valid box"), &[n, n]).expect("valid grid")
}

fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> ComplexField {
    let mut f = ComplexField::zeros(grid);
    for ((i, j, k), v) in f.values_mut().indexed_iter_mut() {
        if !grid.is_boundary([i, j, k]) {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    f
}

fn max_state_diff(a: &CoupledState, b: &CoupledState) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x.max_abs_diff(y))
        .fold(0.0, f64::max)
}

/// Two-component parameters in the style of the accuracy study.
pub fn gaussian_pair_params(dt: f64) -> CgpeParams {
    let trap: PotentialSpec = HarmonicTrap::new(1.0, 1.0).expect("positive").into();
    CgpeParams {
        lambda: 1.0,
        omega: 0.4,
        beta: [[51.5, 50.0], [50.0, 48.5]],
        dt,
        potentials: [trap.clone(), trap],
    }
}

pub fn gaussian_pair_state(grid: &GridSpec) -> Result<CoupledState> {
    let g1 = |x: &[f64]| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp() / (2.0 * PI).sqrt(), 0.0);
    let g2 = |x: &[f64]| {
        let q = x[0] * x[0] + 1.5 * x[1] * x[1];
        Complex64::new(1.5f64.powf(0.25) * (-q / 2.0).exp() / (2.0 * PI).sqrt(), 0.0)
    };
    Ok(CoupledState::from_functions(grid, &[&g1, &g2])?)
}

pub fn transform_round_trip(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (nx, ny) in [(8, 8), (32, 24), (64, 64), (10, 6)] {
        let g = GridSpec::new(BoxDomain::new(&[(-3.0, 5.0), (0.0, 2.0)])?, &[nx, ny])?;
        let f = random_field(&g, rng);
        worst = worst.max(dst_inverse(&dst_forward(&f)?).max_abs_diff(&f));
    }
    Ok(worst)
}

pub fn rotation_orthogonality(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (t, omega) = (rng.gen_range(-100.0..100.0), rng.gen_range(-3.0..3.0));
        for dim in [2, 3] {
            let a = rotation_matrix(t, omega, dim);
            let gram = a.transpose() * &a - DMatrix::<f64>::identity(dim, dim);
            worst = worst.max(gram.amax()).max((a.determinant() - 1.0).abs());
        }
    }
    worst
}

/// Analytic phase integral against composite Simpson on the directly
/// rotated trap.
pub fn phase_integral_quadrature(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let trap = HarmonicTrap::new(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5))?;
        let spec: PotentialSpec = trap.into();
        let omega = rng.gen_range(-1.0..1.0);
        let p = [rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)];
        let t0 = rng.gen_range(0.0..10.0);
        let t1 = t0 + rng.gen_range(0.0..0.1);
        let direct = |t: f64| {
            let (s, c) = (omega * t).sin_cos();
            let (x, y) = (c * p[0] + s * p[1], -s * p[0] + c * p[1]);
            0.5 * (trap.gamma_x().powi(2) * x * x + trap.gamma_y().powi(2) * y * y)
        };
        let analytic = phase_integral(&spec, &p, t0, t1, omega)?;
        let quad = simpson(direct, t0, t1, 512);
        worst = worst.max((analytic - quad).abs());
    }
    Ok(worst)
}

pub fn eulerian_identity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let g = square(16, 4.0);
    let s = CoupledState::new(vec![random_field(&g, rng), random_field(&g, rng)], 0.0)?;
    let omega = 0.6;
    let frame = eulerian_frame(&s, 2.0 * PI / omega, omega, &g)?;
    Ok(frame
        .iter()
        .zip(s.components())
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max))
}

/// Splitting solution at `t = 0.1` against RK4 with step `1e-5` on a 16x16
/// grid; composite `l2` difference.
pub fn oracle_equivalence() -> Result<f64> {
    let g = square(16, 8.0);
    let params = gaussian_pair_params(1e-4);
    let s0 = gaussian_pair_state(&g)?;
    let mut s = s0.clone();
    CgpeSolver::new(&g, params.clone())?.evolve(&mut s, 1000, 0, |_| {})?;
    let reference = rk4_reference(&s0, &params, 0.1, 1e-5)?;
    Ok(s.l2_distance(&reference)?)
}

/// The general solver with `B = ((0, -lambda), (-lambda, 0))` and `g = 1`
/// against the two-component solver over `steps` steps.
pub fn vgpe_reduction(steps: usize) -> Result<f64> {
    let g = square(32, 8.0);
    let cgpe = gaussian_pair_params(1e-3);
    let lambda = cgpe.lambda;
    let vgpe = VgpeParams {
        beta: cgpe.beta.iter().map(|r| r.to_vec()).collect(),
        omega: cgpe.omega,
        dt: cgpe.dt,
        potentials: cgpe.potentials.to_vec(),
        drive: Drive {
            matrix: DMatrix::from_row_slice(2, 2, &[0.0, -lambda, -lambda, 0.0]),
            envelope: Envelope::Constant(1.0),
        },
    };
    let s0 = gaussian_pair_state(&g)?;
    let (mut a, mut b) = (s0.clone(), s0);
    CgpeSolver::new(&g, cgpe)?.evolve(&mut a, steps, 0, |_| {})?;
    VgpeSolver::new(&g, vgpe)?.evolve(&mut b, steps, 0, |_| {})?;
    Ok(a.l2_distance(&b)?)
}

/// Relative mass drift over 50 steps with an anisotropic trap.
pub fn mass_drift(rng: &mut ChaCha8Rng) -> Result<f64> {
    let g = square(32, 6.0);
    let mut params = gaussian_pair_params(1e-2);
    params.potentials[1] = HarmonicTrap::new(1.05, 0.9)?.into();
    let mut s = CoupledState::new(vec![random_field(&g, rng), random_field(&g, rng)], 0.0)?;
    let n0 = s.total_mass();
    let mut worst: f64 = 0.0;
    CgpeSolver::new(&g, params)?.evolve(&mut s, 50, 1, |st| {
        worst = worst.max((st.total_mass() - n0).abs() / n0);
    })?;
    Ok(worst)
}

/// A step forward followed by the same step backwards.
pub fn time_reversal() -> Result<f64> {
    let g = square(32, 8.0);
    let mut params = gaussian_pair_params(1e-2);
    params.potentials[1] = HarmonicTrap::new(1.05, 0.9)?.into();
    let s0 = gaussian_pair_state(&g)?;
    let mut s = s0.clone();
    let mut solver = CgpeSolver::new(&g, params)?;
    solver.step_by(&mut s, 1e-2)?;
    solver.step_by(&mut s, -1e-2)?;
    Ok(max_state_diff(&s, &s0))
}

/// Runs every check with a fixed seed.
pub fn checks() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();
    let mut push = |name, deviation, tolerance| out.push(Check { name, deviation, tolerance });
    push("sine transform round trip", transform_round_trip(&mut rng)?, 1e-12);
    push("rotation orthogonality", rotation_orthogonality(&mut rng), 1e-15);
    push("phase integral vs quadrature", phase_integral_quadrature(&mut rng)?, 1e-12);
    push("Eulerian reconstruction at full revolution", eulerian_identity(&mut rng)?, 1e-12);
    push("mass conservation", mass_drift(&mut rng)?, 1e-12);
    push("time reversal", time_reversal()?, 1e-12);
    push("VGPE reduction to two components", vgpe_reduction(100)?, 1e-10);
    push("splitting vs RK4 reference", oracle_equivalence()?, 1e-6);
    Ok(out)
}
