//! Brute-force reference for the splitting solvers on tiny grids: the full
//! semidiscrete right-hand side without splitting, classical RK4 on it, and
//! the dense sine-basis Laplacian.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, DstScratch, GridSpec, SinePlan};
use crate::rotating::effective_potential;
use crate::state::{CoupledState, Model};

/// Largest cell count per axis the oracle accepts.
pub const MAX_ORACLE_CELLS: usize = 32;

/// Largest reference step accepted by [`rk4_reference`].
pub const MAX_REFERENCE_STEP: f64 = 1e-4;

fn guard(grid: &GridSpec) -> Result<()> {
    match (0..grid.dim()).map(|a| grid.cells(a)).max() {
        Some(n) if n > MAX_ORACLE_CELLS => Err(Error::OracleTooLarge(n + 1)),
        _ => Ok(()),
    }
}

/// Evaluates `d phi / dt` for the unsplit semidiscrete system.
pub struct Oracle {
    plan: SinePlan,
    scratch: DstScratch,
    symbols: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl Oracle {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        guard(grid)?;
        let points = ndarray::indices(grid.node_shape())
            .into_iter()
            .map(|(i, j, k)| grid.node_point([i, j, k]))
            .collect();
        Ok(Self {
            plan: SinePlan::new(grid),
            scratch: DstScratch::default(),
            symbols: grid.symbol_table().into_raw_vec_and_offset().0,
            points,
        })
    }

    /// `-i ([-Lap/2 + W_j(t) + sum_k beta_jk |phi_k|^2] phi_j + sum_k c_jk(t) phi_k)`.
    pub fn rhs(&mut self, state: &CoupledState, model: &impl Model, t: f64) -> Result<CoupledState> {
        let m = state.component_count();
        if model.component_count() != m {
            return Err(Error::InvalidParameter(format!(
                "model has {} components, state has {m}",
                model.component_count()
            )));
        }
        if state.grid() != self.plan.grid() {
            return Err(Error::GridMismatch("state is not on the oracle grid".into()));
        }
        let grid = self.plan.grid().clone();
        let omega = model.omega();
        let values: Vec<&[Complex64]> = state
            .components()
            .iter()
            .map(|c| c.values().as_slice().expect("standard layout"))
            .collect();
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            // -Lap/2 phi_j through the sine transform
            let mut lap = state.component(j).values().clone();
            self.plan.forward_in_place(&mut lap, &mut self.scratch);
            for (v, s) in lap.iter_mut().zip(&self.symbols) {
                *v *= 0.5 * s;
            }
            self.plan.inverse_in_place(&mut lap, &mut self.scratch);

            let spec = model.potential(j);
            let couplings: Vec<f64> = (0..m).map(|k| model.coupling(j, k, t)).collect();
            let betas: Vec<f64> = (0..m).map(|k| model.beta(j, k)).collect();
            for ((n, v), point) in lap.iter_mut().enumerate().zip(&self.points) {
                let phi = values[j][n];
                let mut h = *v;
                if phi != Complex64::new(0.0, 0.0) {
                    let nonlinear: f64 = (0..m).map(|k| betas[k] * values[k][n].norm_sqr()).sum();
                    h += phi * (effective_potential(spec, point, t, omega) + nonlinear);
                }
                for (k, c) in couplings.iter().enumerate() {
                    if *c != 0.0 {
                        h += values[k][n] * *c;
                    }
                }
                *v = Complex64::new(h.im, -h.re);
            }
            out.push(ComplexField::from_values(&grid, lap)?);
        }
        CoupledState::new(out, state.time())
    }
}

/// The unsplit right-hand side at time `t`.
pub fn apply_rhs(state: &CoupledState, model: &impl Model, t: f64) -> Result<CoupledState> {
    Oracle::new(state.grid())?.rhs(state, model, t)
}

fn axpy(base: &CoupledState, k: &CoupledState, a: f64) -> CoupledState {
    let mut out = base.clone();
    for (o, d) in out.components_mut().iter_mut().zip(k.components()) {
        o.values_mut().zip_mut_with(d.values(), |x, y| *x += y * a);
    }
    out
}

/// Classical RK4 from `state.time()` to `t_end` with steps of at most `dt_ref`.
pub fn rk4_reference(
    state: &CoupledState,
    model: &impl Model,
    t_end: f64,
    dt_ref: f64,
) -> Result<CoupledState> {
    if !(dt_ref > 0.0 && dt_ref <= MAX_REFERENCE_STEP) {
        return Err(Error::InvalidParameter(format!(
            "reference step {dt_ref} must lie in (0, {MAX_REFERENCE_STEP}]"
        )));
    }
    let t0 = state.time();
    if !(t_end >= t0) {
        return Err(Error::BackwardWindow { start: t0, end: t_end });
    }
    let mut oracle = Oracle::new(state.grid())?;
    let steps = ((t_end - t0) / dt_ref - 1e-9).ceil().max(0.0) as usize;
    let mut y = state.clone();
    if steps == 0 {
        y.set_time(t_end);
        return Ok(y);
    }
    let dt = (t_end - t0) / steps as f64;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let k1 = oracle.rhs(&y, model, t)?;
        let k2 = oracle.rhs(&axpy(&y, &k1, dt / 2.0), model, t + dt / 2.0)?;
        let k3 = oracle.rhs(&axpy(&y, &k2, dt / 2.0), model, t + dt / 2.0)?;
        let k4 = oracle.rhs(&axpy(&y, &k3, dt), model, t + dt)?;
        for (c, comp) in y.components_mut().iter_mut().enumerate() {
            let (a, b, e, f) = (
                k1.component(c).values(),
                k2.component(c).values(),
                k3.component(c).values(),
                k4.component(c).values(),
            );
            ndarray::Zip::from(comp.values_mut())
                .and(a)
                .and(b)
                .and(e)
                .and(f)
                .for_each(|v, a, b, e, f| *v += (a + b * 2.0 + e * 2.0 + f) * (dt / 6.0));
        }
        y.set_time(t0 + (n + 1) as f64 * dt);
    }
    if !y.is_finite() {
        return Err(Error::Diverged { t: y.time() });
    }
    Ok(y)
}

/// Dense matrix of the spectral Laplacian on the interior nodes, ordered
/// row-major like the field arrays, assembled from explicit sine matrices
/// `S diag(-symbol) S^{-1}` with `S_{sp} = sin(p s pi / J)`.
pub fn dense_laplacian(grid: &GridSpec) -> Result<DMatrix<f64>> {
    guard(grid)?;
    let dim = grid.dim();
    let factors: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..dim)
        .map(|a| {
            let n = grid.cells(a);
            let s = DMatrix::from_fn(n - 1, n - 1, |r, p| {
                ((p + 1) as f64 * (r + 1) as f64 * std::f64::consts::PI / n as f64).sin()
            });
            // S^{-1} = (2/n) S
            let s_inv = &s * (2.0 / n as f64);
            let mu: Vec<f64> = (1..n).map(|p| grid.frequency(a, p).powi(2)).collect();
            let d2 = &s * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mu)) * s_inv;
            (d2, DMatrix::identity(n - 1, n - 1))
        })
        .collect();
    // -Lap = sum_a I x .. x D2_a x .. x I
    let mut total: Option<DMatrix<f64>> = None;
    for a in 0..dim {
        let mut term = DMatrix::from_element(1, 1, 1.0);
        for (b, (d2, eye)) in factors.iter().enumerate() {
            term = term.kronecker(if a == b { d2 } else { eye });
        }
        total = Some(match total {
            Some(t) => t + term,
            None => term,
        });
    }
    Ok(-total.expect("dim >= 2"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgpe::{init_from_functions, CgpeParams};
    use crate::grid::BoxDomain;
    use crate::rotating::{CustomPotential, HarmonicTrap, PotentialSpec};
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(BoxDomain::square(-4.0, 4.0).unwrap(), &[n, n]).unwrap()
    }

    fn free() -> CgpeParams {
        let zero = PotentialSpec::Custom(CustomPotential::new(|_, _| 0.0, false));
        CgpeParams {
            lambda: 0.0,
            omega: 0.0,
            beta: [[0.0; 2]; 2],
            dt: 1e-3,
            potentials: [zero.clone(), zero],
        }
    }

    fn mode(x: &[f64]) -> Complex64 {
        Complex64::new(((x[0] + 4.0) * PI / 8.0).sin() * ((x[1] + 4.0) * 2.0 * PI / 8.0).sin(), 0.0)
    }

    fn zero(_: &[f64]) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn guard_rejects_large_grids() {
        let s = CoupledState::zeros(&grid(64), 2);
        assert!(matches!(apply_rhs(&s, &free(), 0.0), Err(Error::OracleTooLarge(65))));
        assert!(dense_laplacian(&grid(64)).is_err());
    }

    #[test]
    fn zero_state_and_single_mode() {
        let g = grid(16);
        let s = CoupledState::zeros(&g, 2);
        let d = apply_rhs(&s, &free(), 0.0).unwrap();
        assert!(d.components().iter().all(|c| c.values().iter().all(|v| v.norm() == 0.0)));

        let s = init_from_functions(&g, mode, zero).unwrap();
        let d = apply_rhs(&s, &free(), 0.0).unwrap();
        let symbol = g.laplacian_symbol(&[1, 2]).unwrap();
        for (a, b) in d.component(0).values().iter().zip(s.component(0).values()) {
            let expected = Complex64::new(0.0, -0.5 * symbol) * b;
            assert!((a - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn rk4_free_mode_phase() {
        let g = grid(8);
        let s = init_from_functions(&g, mode, zero).unwrap();
        let out = rk4_reference(&s, &free(), 0.05, 1e-4).unwrap();
        let symbol = g.laplacian_symbol(&[1, 2]).unwrap();
        let phase = Complex64::from_polar(1.0, -0.5 * symbol * 0.05);
        for (a, b) in out.component(0).values().iter().zip(s.component(0).values()) {
            assert!((a - b * phase).norm() < 1e-10);
        }
        assert!((out.time() - 0.05).abs() < 1e-15);
        assert!(rk4_reference(&s, &free(), 0.05, 1e-3).is_err());
    }

    #[test]
    fn rk4_mass_drift_is_small() {
        let g = grid(16);
        let trap: PotentialSpec = HarmonicTrap::new(1.0, 1.0).unwrap().into();
        let p = CgpeParams {
            lambda: 1.0,
            omega: 0.4,
            beta: [[51.5, 50.0], [50.0, 48.5]],
            dt: 1e-3,
            potentials: [trap.clone(), trap],
        };
        let s = init_from_functions(
            &g,
            |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp() / (2.0 * PI).sqrt(), 0.0),
            |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp() / (2.0 * PI).sqrt(), 0.0),
        )
        .unwrap();
        let out = rk4_reference(&s, &p, 0.01, 1e-5).unwrap();
        assert!((out.total_mass() - s.total_mass()).abs() <= 1e-8);
    }

    #[test]
    fn dense_laplacian_acts_like_the_symbol() {
        let g = grid(8);
        let lap = dense_laplacian(&g).unwrap();
        assert_eq!(lap.nrows(), 49);
        let v = nalgebra::DVector::from_fn(49, |n, _| {
            let (i, j) = (n / 7 + 1, n % 7 + 1);
            let x = g.node_point([i, j, 0]);
            mode(&x).re
        });
        let symbol = g.laplacian_symbol(&[1, 2]).unwrap();
        let out = &lap * &v;
        for (a, b) in out.iter().zip(v.iter()) {
            assert!((a + symbol * b).abs() < 1e-12);
        }
    }
}
