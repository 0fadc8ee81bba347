//! Step-size and mesh-size ladders against a self-computed fine reference.

use std::fmt;

use rotbec::cgpe::CgpeSolver;
use rotbec::grid::GridSpec;
use rotbec::state::CoupledState;

use crate::config::{grid_from, InitialCondition, RunConfig};
use crate::error::{CliError, Result};
use crate::initial::initial_state;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Spatial,
    Temporal,
}

impl Mode {
    fn symbol(self) -> &'static str {
        match self {
            Mode::Spatial => "h",
            Mode::Temporal => "k",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rung {
    /// Mesh size or time step of this rung.
    pub value: f64,
    /// Composite `l2` distance to the reference over all components.
    pub error: f64,
    /// `error` of the previous rung divided by this one.
    pub ratio: Option<f64>,
    /// `log(ratio) / log(previous value / value)`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeReport {
    pub mode: Mode,
    pub t_end: f64,
    pub reference: f64,
    pub rungs: Vec<Rung>,
}

impl fmt::Display for ConvergeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.mode.symbol();
        writeln!(f, "# {s}-ladder at t = {}, reference {s} = {}", self.t_end, self.reference)?;
        writeln!(f, "{:>14} {:>14} {:>10} {:>8}", s, "error", "ratio", "order")?;
        for r in &self.rungs {
            let opt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
            writeln!(
                f,
                "{:>14.6e} {:>14.4e} {:>10} {:>8}",
                r.value,
                r.error,
                opt(r.ratio, 2),
                opt(r.order, 3)
            )?;
        }
        Ok(())
    }
}

/// Attaches ratios and observed orders to consecutive rungs.
pub fn rungs(values: &[f64], errors: &[f64]) -> Vec<Rung> {
    values
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(i, (&value, &error))| {
            let ratio = (i > 0).then(|| errors[i - 1] / error);
            let order = ratio.map(|r| r.ln() / (values[i - 1] / value).ln());
            Rung { value, error, ratio, order }
        })
        .collect()
}

fn steps_to(t_end: f64, dt: f64) -> Result<usize> {
    let n = t_end / dt;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n {
        return Err(CliError::config(format!(
            "t = {t_end} is not a whole number of steps of {dt}"
        )));
    }
    Ok(rounded as usize)
}

fn solve(config: &RunConfig, grid: &GridSpec, dt: f64, t_end: f64) -> Result<CoupledState> {
    let mut params = config.params()?;
    params.dt = dt;
    let n = steps_to(t_end, dt)?;
    let mut state = initial_state(config, grid)?;
    if state.time() != 0.0 {
        return Err(CliError::config("convergence studies start from t = 0"));
    }
    let mut solver = CgpeSolver::new(grid, params).map_err(|e| CliError::config(e.to_string()))?;
    solver.evolve(&mut state, n, 0, |_| {})?;
    Ok(state)
}

/// Composite `l2` distance on the coarse grid, sampling the fine state at
/// the coarse nodes.
pub fn coarse_distance(coarse: &CoupledState, fine: &CoupledState) -> Result<f64> {
    let (gc, gf) = (coarse.grid(), fine.grid());
    let mut stride = [1usize; 3];
    for a in 0..gc.dim() {
        if gf.cells(a) % gc.cells(a) != 0 || gc.domain().bounds(a) != gf.domain().bounds(a) {
            return Err(CliError::config(format!(
                "reference grid {gf} does not refine {gc}"
            )));
        }
        stride[a] = gf.cells(a) / gc.cells(a);
    }
    let shape = gc.node_shape();
    let mut sum = 0.0;
    for (c, f) in coarse.components().iter().zip(fine.components()) {
        let (cv, fv) = (c.values(), f.values());
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    let d = cv[[i, j, k]] - fv[[i * stride[0], j * stride[1], k * stride[2]]];
                    sum += d.norm_sqr();
                }
            }
        }
    }
    Ok((sum * gc.cell_volume()).sqrt())
}

/// Runs the ladder of `mode` from the config against its reference.
pub fn converge(config: &RunConfig, mode: Mode) -> Result<ConvergeReport> {
    let c = &config.converge;
    let t_end = c.t_end.unwrap_or(config.t_end);
    let (ladder, reference) = match mode {
        Mode::Temporal => (&c.dt_ladder, c.dt_reference),
        Mode::Spatial => (&c.h_ladder, c.h_reference),
    };
    let key = match mode {
        Mode::Temporal => "dt",
        Mode::Spatial => "h",
    };
    if ladder.is_empty() {
        return Err(CliError::config(format!("converge.{key}_ladder is empty")));
    }
    let reference =
        reference.ok_or_else(|| CliError::config(format!("converge.{key}_reference is missing")))?;
    if matches!(config.initial, InitialCondition::Dump(_)) && mode == Mode::Spatial {
        return Err(CliError::config("a spatial ladder needs built-in initial data"));
    }

    let errors = match mode {
        Mode::Temporal => {
            let grid = config.grid()?;
            for &k in ladder.iter() {
                steps_to(t_end, k)?;
            }
            log::info!("reference run with k = {reference}");
            let exact = solve(config, &grid, reference, t_end)?;
            ladder
                .iter()
                .map(|&k| {
                    log::info!("rung k = {k}");
                    Ok(solve(config, &grid, k, t_end)?.l2_distance(&exact)?)
                })
                .collect::<Result<Vec<f64>>>()?
        }
        Mode::Spatial => {
            let grid_for = |h: f64| -> Result<GridSpec> {
                let cells = config
                    .domain
                    .iter()
                    .map(|(lo, hi)| {
                        let n = (hi - lo) / h;
                        if (n - n.round()).abs() > 1e-9 * n {
                            Err(CliError::config(format!("h = {h} does not divide the domain")))
                        } else {
                            Ok(n.round() as usize)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                grid_from(&config.domain, &cells)
            };
            let fine_grid = grid_for(reference)?;
            let grids = ladder.iter().map(|&h| grid_for(h)).collect::<Result<Vec<_>>>()?;
            steps_to(t_end, config.dt)?;
            log::info!("reference run with h = {reference}");
            let exact = solve(config, &fine_grid, config.dt, t_end)?;
            let mut errors = Vec::with_capacity(grids.len());
            for (g, h) in grids.iter().zip(ladder.iter()) {
                log::info!("rung h = {h}");
                errors.push(coarse_distance(&solve(config, g, config.dt, t_end)?, &exact)?);
            }
            errors
        }
    };
    Ok(ConvergeReport {
        mode,
        t_end,
        reference,
        rungs: rungs(ladder, &errors),
    })
}
