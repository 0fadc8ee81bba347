//! Built-in initial data and dump loading.

use std::f64::consts::PI;

use num_complex::Complex64;
use rotbec::grid::GridSpec;
use rotbec::output::read_grid_dump;
use rotbec::state::CoupledState;

use crate::config::{InitialCondition, RunConfig};
use crate::error::{CliError, Result};

/// Unit-mass Gaussian factor along `z` for 3D runs, 1 in 2D.
fn z_factor(x: &[f64]) -> f64 {
    match x.get(2) {
        Some(z) => PI.powf(-0.25) * (-z * z / 2.0).exp(),
        None => 1.0,
    }
}

fn gaussian_1(x: &[f64]) -> Complex64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    Complex64::new((-r2 / 2.0).exp() / (2.0 * PI).sqrt() * z_factor(x), 0.0)
}

fn gaussian_2(x: &[f64]) -> Complex64 {
    let q = x[0] * x[0] + 1.5 * x[1] * x[1];
    Complex64::new(1.5f64.powf(0.25) * (-q / 2.0).exp() / (2.0 * PI).sqrt() * z_factor(x), 0.0)
}

/// `(x + i y) e^{-r^2/2} / sqrt(pi / mass)`
fn vortex(mass: f64) -> impl Fn(&[f64]) -> Complex64 {
    move |x: &[f64]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        Complex64::new(x[0], x[1]) * ((-r2 / 2.0).exp() * (mass / PI).sqrt() * z_factor(x))
    }
}

fn empty(_: &[f64]) -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Builds the initial state on `grid`; dump errors are configuration errors.
pub fn initial_state(config: &RunConfig, grid: &GridSpec) -> Result<CoupledState> {
    let state = match &config.initial {
        InitialCondition::GaussianPair => CoupledState::from_functions(grid, &[&gaussian_1, &gaussian_2]),
        InitialCondition::SingleVortex => CoupledState::from_functions(grid, &[&vortex(1.0), &empty]),
        InitialCondition::VortexPair => {
            let v = vortex(0.5);
            CoupledState::from_functions(grid, &[&v, &v])
        }
        InitialCondition::Dump(path) => {
            let dump = read_grid_dump(path).map_err(|e| CliError::config(format!("initial dump: {e}")))?;
            if dump.grid != *grid {
                return Err(CliError::config(format!(
                    "initial dump {} is on {}, the config asks for {}",
                    path.display(),
                    dump.grid,
                    grid
                )));
            }
            if dump.components.len() != 2 {
                return Err(CliError::config(format!(
                    "initial dump {} has {} components, need 2",
                    path.display(),
                    dump.components.len()
                )));
            }
            let t = dump.metadata.t;
            if t != 0.0 && dump.metadata.omega != config.omega {
                return Err(CliError::config(format!(
                    "initial dump {} was taken at t = {t} with omega = {}, the config has omega = {}",
                    path.display(),
                    dump.metadata.omega,
                    config.omega
                )));
            }
            CoupledState::new(dump.components, t)
        }
    };
    state.map_err(|e| CliError::config(format!("initial data: {e}")))
}
