//! Two-component stepper in rotating Lagrangian coordinates.
//!
//! One Strang step is a half-step of the exactly integrated potential and
//! nonlinear phase, a full step of the kinetic operator fused with the
//! Josephson mixing in sine-coefficient space, and a second phase half-step.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DstScratch, GridSpec, SinePlan};
use crate::rotating::PotentialSpec;
use crate::splitting::{self, kinetic_factors, phase_step, NodeCoordinates, SplitStepper};
use crate::state::{CoupledState, Model};

/// Parameters of the coupled two-component equations.
#[derive(Debug, Clone)]
pub struct CgpeParams {
    /// Rabi frequency of the Josephson coupling `-lambda phi_{3-j}`.
    pub lambda: f64,
    pub omega: f64,
    /// Symmetric interaction matrix.
    pub beta: [[f64; 2]; 2],
    pub dt: f64,
    pub potentials: [PotentialSpec; 2],
}

impl CgpeParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.omega, self.dt]
            .iter()
            .chain(self.beta.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite CGPE parameter".into()));
        }
        if self.beta[0][1] != self.beta[1][0] {
            return Err(Error::InvalidParameter(format!(
                "beta_12 = {} and beta_21 = {} differ",
                self.beta[0][1], self.beta[1][0]
            )));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        Ok(())
    }

    pub(crate) fn beta_rows(&self) -> Vec<Vec<f64>> {
        self.beta.iter().map(|r| r.to_vec()).collect()
    }
}

impl Model for CgpeParams {
    fn component_count(&self) -> usize {
        2
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn beta(&self, j: usize, k: usize) -> f64 {
        self.beta[j][k]
    }

    fn potential(&self, j: usize) -> &PotentialSpec {
        &self.potentials[j]
    }

    fn coupling(&self, j: usize, k: usize, _t: f64) -> f64 {
        if j == k {
            0.0
        } else {
            -self.lambda
        }
    }
}

/// Samples `psi_1^0`, `psi_2^0` on all nodes (boundary forced to zero), `t = 0`.
pub fn init_from_functions(
    grid: &GridSpec,
    psi1: impl Fn(&[f64]) -> Complex64,
    psi2: impl Fn(&[f64]) -> Complex64,
) -> Result<CoupledState> {
    CoupledState::from_functions(grid, &[&psi1, &psi2])
}

pub struct CgpeSolver {
    params: CgpeParams,
    beta_rows: Vec<Vec<f64>>,
    plan: SinePlan,
    coords: NodeCoordinates,
    scratch: DstScratch,
    kinetic: Option<(f64, Array3<Complex64>)>,
}

impl CgpeSolver {
    pub fn new(grid: &GridSpec, params: CgpeParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            beta_rows: params.beta_rows(),
            plan: SinePlan::new(grid),
            coords: NodeCoordinates::new(grid),
            scratch: DstScratch::default(),
            kinetic: None,
            params,
        })
    }

    pub fn params(&self) -> &CgpeParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        self.plan.grid()
    }

    fn check_state(&self, state: &CoupledState) -> Result<()> {
        if state.component_count() != 2 {
            return Err(Error::InvalidParameter(format!(
                "two-component solver got {} components",
                state.component_count()
            )));
        }
        if state.grid() != self.grid() {
            return Err(Error::GridMismatch(format!(
                "solver grid {}, state grid {}",
                self.grid(),
                state.grid()
            )));
        }
        Ok(())
    }

    /// Exact potential + nonlinear phase over `[t_n, t_n + duration]`.
    pub fn potential_half_step(
        &self,
        state: &mut CoupledState,
        t_n: f64,
        duration: f64,
    ) -> Result<()> {
        self.check_state(state)?;
        if duration < 0.0 {
            return Err(Error::BackwardWindow {
                start: t_n,
                end: t_n + duration,
            });
        }
        self.phase(state, t_n, t_n + duration);
        Ok(())
    }

    fn phase(&self, state: &mut CoupledState, t0: f64, t1: f64) {
        phase_step(
            state,
            &self.coords,
            &self.beta_rows,
            &self.params.potentials,
            self.params.omega,
            t0,
            t1,
        );
    }

    /// Free evolution plus Josephson mixing over `duration`, solved exactly in
    /// sine-coefficient space:
    /// `c_j <- exp(-i duration symbol / 2) [cos(lambda duration) c_j + i sin(lambda duration) c_{3-j}]`.
    pub fn kinetic_josephson_step(&mut self, state: &mut CoupledState, duration: f64) -> Result<()> {
        self.check_state(state)?;
        self.kinetic(state, duration);
        Ok(())
    }

    fn kinetic(&mut self, state: &mut CoupledState, duration: f64) {
        if self.kinetic.as_ref().map(|(tau, _)| *tau) != Some(duration) {
            self.kinetic = Some((duration, kinetic_factors(self.plan.grid(), duration)));
        }
        let (s, c) = (self.params.lambda * duration).sin_cos();
        let mix = Complex64::new(0.0, s);
        let (first, second) = state.components_mut().split_at_mut(1);
        let a = first[0].values_mut();
        let b = second[0].values_mut();
        self.plan.forward_in_place(a, &mut self.scratch);
        self.plan.forward_in_place(b, &mut self.scratch);
        let eta = &self.kinetic.as_ref().expect("set above").1;
        let a_s = a.as_slice_mut().expect("standard layout");
        let b_s = b.as_slice_mut().expect("standard layout");
        let eta_s = eta.as_slice().expect("standard layout");
        for ((x, y), e) in a_s.iter_mut().zip(b_s.iter_mut()).zip(eta_s) {
            let (x0, y0) = (*x, *y);
            *x = e * (x0 * c + mix * y0);
            *y = e * (y0 * c + mix * x0);
        }
        self.plan.inverse_in_place(a, &mut self.scratch);
        self.plan.inverse_in_place(b, &mut self.scratch);
    }

    /// One Strang step of length `dt`: phase over `[t_n, t_n + dt/2]`,
    /// kinetic + Josephson over `dt`, phase over `[t_n + dt/2, t_n + dt]`.
    /// A negative `dt` retraces the step backwards.
    pub fn step_by(&mut self, state: &mut CoupledState, dt: f64) -> Result<()> {
        self.check_state(state)?;
        splitting::strang(self, state, dt);
        Ok(())
    }

    pub fn strang_step(&mut self, state: &mut CoupledState) -> Result<()> {
        self.step_by(state, self.params.dt)
    }

    /// Applies `n_steps` Strang steps. The observer sees the state at the
    /// start, after every `sample_every` steps (0 disables) and at the end;
    /// each sample is checked for non-finite values first.
    pub fn evolve(
        &mut self,
        state: &mut CoupledState,
        n_steps: usize,
        sample_every: usize,
        mut observer: impl FnMut(&CoupledState),
    ) -> Result<()> {
        self.check_state(state)?;
        let dt = self.params.dt;
        splitting::evolve(self, state, dt, n_steps, sample_every, &mut observer)
    }
}

impl SplitStepper for CgpeSolver {
    fn phase(&self, state: &mut CoupledState, t0: f64, t1: f64) {
        CgpeSolver::phase(self, state, t0, t1);
    }

    fn linear(&mut self, state: &mut CoupledState, _t_n: f64, dt: f64) {
        self.kinetic(state, dt);
    }
}

/// Convenience wrapper building a solver on the state's grid.
pub fn strang_step(state: &mut CoupledState, params: &CgpeParams) -> Result<()> {
    CgpeSolver::new(state.grid(), params.clone())?.strang_step(state)
}
