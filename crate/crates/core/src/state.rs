//! Multi-component wave-function state and the model description shared by
//! the solvers, the diagnostics and the oracle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec};
use crate::rotating::PotentialSpec;

/// Everything the right-hand side
/// `i d/dt phi_j = [-1/2 Lap + W_j + sum_k beta_jk |phi_k|^2] phi_j + sum_k c_jk(t) phi_k`
/// needs to know, in rotating Lagrangian coordinates.
pub trait Model {
    fn component_count(&self) -> usize;
    fn omega(&self) -> f64;
    fn beta(&self, j: usize, k: usize) -> f64;
    fn potential(&self, j: usize) -> &PotentialSpec;
    /// Coefficient of `phi_k` in the equation for `phi_j` at time `t`.
    fn coupling(&self, j: usize, k: usize, t: f64) -> f64;
}

/// Ordered component fields on one grid plus the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    components: Vec<ComplexField>,
    t: f64,
}

impl CoupledState {
    pub fn new(components: Vec<ComplexField>, t: f64) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("state needs at least one component".into()))?;
        if let Some(other) = components.iter().find(|c| c.grid() != first.grid()) {
            return Err(Error::GridMismatch(format!(
                "components on {} and {}",
                first.grid(),
                other.grid()
            )));
        }
        Ok(Self { components, t })
    }

    pub fn zeros(grid: &GridSpec, count: usize) -> Self {
        Self {
            components: vec![ComplexField::zeros(grid); count],
            t: 0.0,
        }
    }

    /// Samples one initial function per component at every node, zeroes the
    /// boundary and sets `t = 0`.
    pub fn from_functions(
        grid: &GridSpec,
        initial: &[&dyn Fn(&[f64]) -> Complex64],
    ) -> Result<Self> {
        let components: Vec<ComplexField> = initial
            .iter()
            .map(|f| ComplexField::from_fn(grid, f))
            .collect();
        for (j, c) in components.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite(format!("initial data of component {}", j + 1)));
            }
        }
        let state = Self::new(components, 0.0)?;
        log::debug!("initial data on {grid}: total mass {:.12}", state.total_mass());
        Ok(state)
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComplexField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ComplexField] {
        &mut self.components
    }

    pub fn component(&self, j: usize) -> &ComplexField {
        &self.components[j]
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    /// Discrete masses `N_j`.
    pub fn masses(&self) -> Vec<f64> {
        self.components.iter().map(ComplexField::norm_sqr).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    /// Rescales all components so the total mass is one. No-op on a zero state.
    pub fn normalize(&mut self) {
        let n = self.total_mass();
        if n > 0.0 {
            let scale = 1.0 / n.sqrt();
            for c in &mut self.components {
                c.values_mut().mapv_inplace(|v| v * scale);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ComplexField::is_finite)
    }

    /// Composite discrete `l2` distance `sqrt(sum_j ||phi_j - chi_j||^2)`.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        if self.grid() != other.grid() || self.component_count() != other.component_count() {
            return Err(Error::GridMismatch("states are not comparable".into()));
        }
        let h = self.grid().cell_volume();
        let sum: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                a.values()
                    .iter()
                    .zip(b.values().iter())
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        Ok((h * sum).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;

    fn grid() -> GridSpec {
        GridSpec::new(BoxDomain::square(-4.0, 4.0).unwrap(), &[16, 16]).unwrap()
    }

    #[test]
    fn rejects_mixed_grids_and_empty_states() {
        let other = GridSpec::new(BoxDomain::square(-4.0, 4.0).unwrap(), &[8, 8]).unwrap();
        let mixed = vec![ComplexField::zeros(&grid()), ComplexField::zeros(&other)];
        assert!(CoupledState::new(mixed, 0.0).is_err());
        assert!(CoupledState::new(vec![], 0.0).is_err());
    }

    #[test]
    fn non_finite_initial_data_is_rejected() {
        let bad = |_: &[f64]| Complex64::new(f64::NAN, 0.0);
        let good = |_: &[f64]| Complex64::new(1.0, 0.0);
        assert!(CoupledState::from_functions(&grid(), &[&good, &bad]).is_err());
    }

    #[test]
    fn normalize_sets_unit_mass() {
        let f = |x: &[f64]| Complex64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.3);
        let mut s = CoupledState::from_functions(&grid(), &[&f, &f]).unwrap();
        s.normalize();
        assert!((s.total_mass() - 1.0).abs() < 1e-14);
        let mut z = CoupledState::zeros(&grid(), 2);
        z.normalize();
        assert_eq!(z.total_mass(), 0.0);
    }
}
