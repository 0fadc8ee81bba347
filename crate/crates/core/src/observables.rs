//! Masses, energy, angular momentum and condensate widths evaluated on the
//! Lagrangian grid.
//!
//! Gradient norms, `V_j |psi_j|^2` and `Re(psi* L_z psi)` are invariant under
//! the rotation of coordinates, so the Eulerian quantities are computed from
//! `phi_j` directly. Integrals of derivative fields use trapezoid weights:
//! derivatives of the sine interpolant do not vanish on the boundary, and the
//! trapezoid rule integrates products of the resulting cosine modes exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DstScratch, GridSpec, SinePlan};
use crate::rotating::{effective_potential, PotentialSpec};
use crate::state::{CoupledState, Model};

/// Per-component masses at or below this are treated as empty.
pub const EMPTY_COMPONENT_MASS: f64 = 1e-14;

/// Fraction of the mass on boundary-adjacent nodes above which the box is
/// reported as too small.
pub const TAIL_MASS_WARNING: f64 = 1e-10;

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub masses: Vec<f64>,
    pub total_mass: f64,
    pub energy: f64,
    /// `<L_z>_j`, absent for empty components.
    pub lz: Vec<Option<f64>>,
    pub lz_total: f64,
    pub widths: Widths,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Widths {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: Option<f64>,
    /// `sqrt(sigma_x^2 + sigma_y^2)`
    pub sigma_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularMomentum {
    /// `(1/N_j) int phi_j* L_z phi_j`, absent when `N_j <= 1e-14`.
    pub per_component: Vec<Option<f64>>,
    /// `sum_j int phi_j* L_z phi_j`, not normalized.
    pub total: f64,
}

/// Discrete masses `N_j`.
pub fn component_mass(state: &CoupledState) -> Vec<f64> {
    state.masses()
}

/// Energy at time `t`.
pub fn energy(state: &CoupledState, model: &impl Model, t: f64) -> Result<f64> {
    Diagnostics::new(state.grid()).energy(state, model, t)
}

pub fn angular_momentum(state: &CoupledState) -> Result<AngularMomentum> {
    Diagnostics::new(state.grid()).angular_momentum(state)
}

/// Eulerian widths at time `t` from the Lagrangian second moments.
pub fn condensate_widths(state: &CoupledState, t: f64, omega: f64) -> Widths {
    let m = second_moments(state);
    let (s, c) = (omega * t).sin_cos();
    let xx = c * c * m.xx + s * s * m.yy + 2.0 * s * c * m.xy;
    let yy = s * s * m.xx + c * c * m.yy - 2.0 * s * c * m.xy;
    Widths {
        sigma_x: xx.max(0.0).sqrt(),
        sigma_y: yy.max(0.0).sqrt(),
        sigma_z: (state.grid().dim() == 3).then(|| m.zz.max(0.0).sqrt()),
        sigma_r: (xx + yy).max(0.0).sqrt(),
    }
}

/// Mass on nodes next to the boundary divided by the total mass.
pub fn tail_mass_fraction(state: &CoupledState) -> f64 {
    let grid = state.grid();
    let total = state.total_mass();
    if total == 0.0 {
        return 0.0;
    }
    let dim = grid.dim();
    let mut tail = 0.0;
    for c in state.components() {
        for ((i, j, k), v) in c.values().indexed_iter() {
            let idx = [i, j, k];
            let near = (0..dim).any(|a| idx[a] == 1 || idx[a] + 1 == grid.cells(a));
            if near && !grid.is_boundary(idx) {
                tail += v.norm_sqr();
            }
        }
    }
    tail * grid.cell_volume() / total
}

#[derive(Debug, Default)]
struct Moments {
    xx: f64,
    yy: f64,
    xy: f64,
    zz: f64,
}

fn second_moments(state: &CoupledState) -> Moments {
    let grid = state.grid();
    let (x, y) = (grid.coordinates(0), grid.coordinates(1));
    let z = if grid.dim() == 3 { grid.coordinates(2) } else { vec![0.0] };
    let mut m = Moments::default();
    for c in state.components() {
        for ((i, j, k), v) in c.values().indexed_iter() {
            let rho = v.norm_sqr();
            m.xx += x[i] * x[i] * rho;
            m.yy += y[j] * y[j] * rho;
            m.xy += x[i] * y[j] * rho;
            m.zz += z[k] * z[k] * rho;
        }
    }
    let h = grid.cell_volume();
    Moments {
        xx: m.xx * h,
        yy: m.yy * h,
        xy: m.xy * h,
        zz: m.zz * h,
    }
}

/// Reusable evaluator holding the transform plan for one grid.
pub struct Diagnostics {
    plan: SinePlan,
    scratch: DstScratch,
    weights: Vec<Vec<f64>>,
    coords: Vec<Vec<f64>>,
}

/// Gradient of one component and the pointwise `L_z` integrand.
struct ComponentDerivatives {
    grad_sqr: Vec<f64>,
    /// `phi* (x d_y phi - y d_x phi)`; `phi* L_z phi` is `-i` times this.
    rotation: Vec<Complex64>,
}

impl Diagnostics {
    pub fn new(grid: &GridSpec) -> Self {
        let weights = (0..3)
            .map(|a| {
                if a >= grid.dim() {
                    return vec![1.0];
                }
                let n = grid.cells(a);
                (0..=n)
                    .map(|i| if i == 0 || i == n { 0.5 } else { 1.0 })
                    .collect()
            })
            .collect();
        let coords = (0..3)
            .map(|a| if a < grid.dim() { grid.coordinates(a) } else { vec![0.0] })
            .collect();
        Self {
            plan: SinePlan::new(grid),
            scratch: DstScratch::default(),
            weights,
            coords,
        }
    }

    fn check(&self, state: &CoupledState) -> Result<()> {
        if state.grid() != self.plan.grid() {
            return Err(Error::GridMismatch(format!(
                "diagnostics for {}, state on {}",
                self.plan.grid(),
                state.grid()
            )));
        }
        Ok(())
    }

    fn weight(&self, i: usize, j: usize, k: usize) -> f64 {
        self.weights[0][i] * self.weights[1][j] * self.weights[2][k]
    }

    fn derivatives(&mut self, state: &CoupledState) -> Vec<ComponentDerivatives> {
        let grid = self.plan.grid().clone();
        let dim = grid.dim();
        state
            .components()
            .iter()
            .map(|c| {
                let mut grad_sqr = vec![0.0; grid.node_count()];
                let mut partials = Vec::with_capacity(2);
                for axis in 0..dim {
                    let mut d = c.values().clone();
                    self.plan.derivative_in_place(&mut d, axis, &mut self.scratch);
                    for (g, v) in grad_sqr.iter_mut().zip(d.iter()) {
                        *g += v.norm_sqr();
                    }
                    if axis < 2 {
                        partials.push(d);
                    }
                }
                let rotation = c
                    .values()
                    .indexed_iter()
                    .zip(partials[0].iter().zip(partials[1].iter()))
                    .map(|(((i, j, _), phi), (dx, dy))| {
                        phi.conj() * (self.coords[0][i] * dy - self.coords[1][j] * dx)
                    })
                    .collect();
                ComponentDerivatives { grad_sqr, rotation }
            })
            .collect()
    }

    /// `int phi_j* L_z phi_j` per component (real part).
    fn lz_integrals(&self, derivs: &[ComponentDerivatives]) -> Vec<f64> {
        let shape = self.plan.grid().node_shape();
        let h = self.plan.grid().cell_volume();
        derivs
            .iter()
            .map(|d| {
                let mut sum = 0.0;
                let mut n = 0;
                for i in 0..shape[0] {
                    for j in 0..shape[1] {
                        for k in 0..shape[2] {
                            // Re(-i z) = Im z
                            sum += self.weight(i, j, k) * d.rotation[n].im;
                            n += 1;
                        }
                    }
                }
                sum * h
            })
            .collect()
    }

    pub fn angular_momentum(&mut self, state: &CoupledState) -> Result<AngularMomentum> {
        self.check(state)?;
        let derivs = self.derivatives(state);
        Ok(self.lz_from(state, &derivs))
    }

    fn lz_from(&self, state: &CoupledState, derivs: &[ComponentDerivatives]) -> AngularMomentum {
        let integrals = self.lz_integrals(derivs);
        let per_component = integrals
            .iter()
            .zip(state.masses())
            .map(|(l, n)| (n > EMPTY_COMPONENT_MASS).then(|| l / n))
            .collect();
        AngularMomentum {
            per_component,
            total: integrals.iter().sum(),
        }
    }

    pub fn energy(&mut self, state: &CoupledState, model: &impl Model, t: f64) -> Result<f64> {
        self.check(state)?;
        let derivs = self.derivatives(state);
        self.energy_from(state, model, t, &derivs)
    }

    fn energy_from(
        &self,
        state: &CoupledState,
        model: &impl Model,
        t: f64,
        derivs: &[ComponentDerivatives],
    ) -> Result<f64> {
        let m = state.component_count();
        if model.component_count() != m {
            return Err(Error::InvalidParameter(format!(
                "model has {} components, state has {m}",
                model.component_count()
            )));
        }
        let grid = self.plan.grid();
        let dim = grid.dim();
        let shape = grid.node_shape();
        let omega = model.omega();
        let beta: Vec<Vec<f64>> = (0..m).map(|j| (0..m).map(|k| model.beta(j, k)).collect()).collect();
        let coupling: Vec<Vec<f64>> = (0..m)
            .map(|j| (0..m).map(|k| model.coupling(j, k, t)).collect())
            .collect();
        let forms: Vec<Option<_>> = (0..m)
            .map(|j| match model.potential(j) {
                PotentialSpec::Harmonic(trap) => Some(trap.effective_form(t, omega)),
                PotentialSpec::Custom(_) => None,
            })
            .collect();
        let values: Vec<&[Complex64]> = state
            .components()
            .iter()
            .map(|c| c.values().as_slice().expect("standard layout"))
            .collect();

        let mut total = 0.0;
        let mut rho = vec![0.0; m];
        let mut point = [0.0; 3];
        let mut n = 0;
        for i in 0..shape[0] {
            point[0] = self.coords[0][i];
            for j in 0..shape[1] {
                point[1] = self.coords[1][j];
                for k in 0..shape[2] {
                    point[2] = self.coords[2][k];
                    let w = self.weight(i, j, k);
                    let mut local = 0.0;
                    for c in 0..m {
                        rho[c] = values[c][n].norm_sqr();
                    }
                    for c in 0..m {
                        let d = &derivs[c];
                        let pot = match &forms[c] {
                            Some(q) => q.eval(&point[..dim]),
                            None if rho[c] == 0.0 => 0.0,
                            None => effective_potential(model.potential(c), &point[..dim], t, omega),
                        };
                        local += 0.5 * d.grad_sqr[n] + pot * rho[c] - omega * d.rotation[n].im;
                        for e in 0..m {
                            local += 0.5 * beta[c][e] * rho[c] * rho[e];
                            if coupling[c][e] != 0.0 {
                                local += coupling[c][e] * (values[c][n].conj() * values[e][n]).re;
                            }
                        }
                    }
                    total += w * local;
                    n += 1;
                }
            }
        }
        Ok(total * grid.cell_volume())
    }

    /// Full diagnostics row at the state's time.
    pub fn record(&mut self, state: &CoupledState, model: &impl Model) -> Result<DiagnosticsRecord> {
        self.check(state)?;
        let t = state.time();
        let derivs = self.derivatives(state);
        let energy = self.energy_from(state, model, t, &derivs)?;
        let lz = self.lz_from(state, &derivs);
        let tail = tail_mass_fraction(state);
        if tail > TAIL_MASS_WARNING {
            log::warn!("t = {t}: {tail:.3e} of the mass sits next to the boundary; enlarge the box");
        }
        let masses = state.masses();
        Ok(DiagnosticsRecord {
            t,
            total_mass: masses.iter().sum(),
            masses,
            energy,
            lz: lz.per_component,
            lz_total: lz.total,
            widths: condensate_widths(state, t, model.omega()),
        })
    }
}
