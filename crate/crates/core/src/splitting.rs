//! Pieces shared by the two-component and M-component steppers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rotating::{signed_phase_integral, PotentialSpec, QuadraticForm};
use crate::state::CoupledState;

/// How `int W_j` is evaluated at the nodes for one window.
enum WindowPhase<'a> {
    Form(QuadraticForm),
    Pointwise(&'a PotentialSpec),
}

/// Node coordinates per axis, cached once per grid.
pub(crate) struct NodeCoordinates {
    axes: Vec<Vec<f64>>,
    shape: [usize; 3],
}

impl NodeCoordinates {
    pub(crate) fn new(grid: &GridSpec) -> Self {
        let mut axes: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.coordinates(a)).collect();
        if axes.len() == 2 {
            axes.push(vec![0.0]);
        }
        Self {
            axes,
            shape: grid.node_shape(),
        }
    }
}

/// `phi_j <- phi_j exp(-i [(t1 - t0) sum_k beta_jk |phi_k|^2 + int_{t0}^{t1} W_j])`
/// with the densities frozen at the start of the window. `t1 < t0` runs the
/// substep backwards.
pub(crate) fn phase_step(
    state: &mut CoupledState,
    coords: &NodeCoordinates,
    beta: &[Vec<f64>],
    potentials: &[PotentialSpec],
    omega: f64,
    t0: f64,
    t1: f64,
) {
    let m = state.component_count();
    let dim = state.grid().dim();
    let tau = t1 - t0;
    let windows: Vec<WindowPhase> = potentials
        .iter()
        .map(|p| match p {
            PotentialSpec::Harmonic(trap) => WindowPhase::Form(trap.phase_form(t0, t1, omega)),
            custom => WindowPhase::Pointwise(custom),
        })
        .collect();

    let mut slices: Vec<&mut [Complex64]> = state
        .components_mut()
        .iter_mut()
        .map(|c| {
            c.values_mut()
                .as_slice_mut()
                .expect("field arrays are kept in standard layout")
        })
        .collect();
    let mut density = vec![0.0; m];
    let mut point = [0.0; 3];
    let [nx, ny, nz] = coords.shape;
    let mut flat = 0;
    for i in 0..nx {
        point[0] = coords.axes[0][i];
        for j in 0..ny {
            point[1] = coords.axes[1][j];
            for k in 0..nz {
                point[2] = coords.axes[2][k];
                for (c, slice) in slices.iter().enumerate() {
                    density[c] = slice[flat].norm_sqr();
                }
                for (c, slice) in slices.iter_mut().enumerate() {
                    let nonlinear: f64 = beta[c].iter().zip(&density).map(|(b, d)| b * d).sum();
                    let potential = match &windows[c] {
                        WindowPhase::Form(q) => q.eval(&point[..dim]),
                        WindowPhase::Pointwise(spec) => {
                            signed_phase_integral(spec, &point[..dim], t0, t1, omega)
                        }
                    };
                    let (s, co) = (tau * nonlinear + potential).sin_cos();
                    slice[flat] *= Complex64::new(co, -s);
                }
                flat += 1;
            }
        }
    }
}

/// `exp(-i tau symbol / 2)` in node layout.
pub(crate) fn kinetic_factors(grid: &GridSpec, tau: f64) -> ndarray::Array3<Complex64> {
    grid.symbol_table().mapv(|s| {
        let (sn, cs) = (0.5 * tau * s).sin_cos();
        Complex64::new(cs, -sn)
    })
}

/// The two halves of a Strang splitting.
pub(crate) trait SplitStepper {
    /// Phase substep over the oriented window `[t0, t1]`.
    fn phase(&self, state: &mut CoupledState, t0: f64, t1: f64);
    /// Linear substep over `[t_n, t_n + dt]`.
    fn linear(&mut self, state: &mut CoupledState, t_n: f64, dt: f64);
}

/// One Strang step; a negative `dt` runs it backwards.
pub(crate) fn strang<S: SplitStepper>(stepper: &mut S, state: &mut CoupledState, dt: f64) {
    let t_n = state.time();
    let t_half = t_n + 0.5 * dt;
    let t_next = t_n + dt;
    stepper.phase(state, t_n, t_half);
    stepper.linear(state, t_n, dt);
    stepper.phase(state, t_half, t_next);
    state.set_time(t_next);
}

/// `n_steps` Strang steps with sampling. Between samples the trailing phase
/// half-step of one step and the leading one of the next are merged into a
/// single window; moduli are untouched by the phase, so the frozen densities
/// and hence the result are the same as stepping one at a time.
pub(crate) fn evolve<S: SplitStepper>(
    stepper: &mut S,
    state: &mut CoupledState,
    dt: f64,
    n_steps: usize,
    sample_every: usize,
    observer: &mut impl FnMut(&CoupledState),
) -> Result<()> {
    sample(state, observer)?;
    let mut open = false;
    for n in 1..=n_steps {
        let t_n = state.time();
        let t_half = t_n + 0.5 * dt;
        let t_next = t_n + dt;
        if !open {
            stepper.phase(state, t_n, t_half);
        }
        stepper.linear(state, t_n, dt);
        state.set_time(t_next);
        if n == n_steps || (sample_every > 0 && n % sample_every == 0) {
            stepper.phase(state, t_half, t_next);
            open = false;
            sample(state, observer)?;
        } else {
            stepper.phase(state, t_half, t_next + 0.5 * dt);
            open = true;
        }
    }
    Ok(())
}

fn sample(state: &CoupledState, observer: &mut impl FnMut(&CoupledState)) -> Result<()> {
    if !state.is_finite() {
        return Err(Error::Diverged { t: state.time() });
    }
    observer(state);
    Ok(())
}
