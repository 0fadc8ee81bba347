//! Single simulation runs.

use std::path::PathBuf;

use rotbec::cgpe::CgpeSolver;
use rotbec::observables::{Diagnostics, DiagnosticsRecord};
use rotbec::output::{eulerian_frame, write_grid_dump, write_timeseries, DumpMetadata};
use rotbec::state::CoupledState;

use crate::config::{Frame, RunConfig};
use crate::error::{CliError, Result};
use crate::initial::initial_state;

/// Number of steps of size `dt` covering `span`; rounds up unless `span` is
/// a whole number of steps to within round-off.
pub fn step_count(span: f64, dt: f64) -> usize {
    let n = span / dt;
    let rounded = n.round();
    if (n - rounded).abs() <= 1e-9 * n.max(1.0) {
        rounded as usize
    } else {
        n.ceil() as usize
    }
}

/// A validated run: solver, initial state and output schedule.
pub struct Simulation {
    config: RunConfig,
    solver: CgpeSolver,
    state: CoupledState,
    diagnostics: Diagnostics,
    n_steps: usize,
    dump_steps: Vec<usize>,
}

impl Simulation {
    /// Checks everything that can be checked before stepping.
    pub fn prepare(config: &RunConfig) -> Result<Self> {
        let grid = config.grid()?;
        let params = config.params()?;
        let state = initial_state(config, &grid)?;
        let t0 = state.time();
        let span = config.t_end - t0;
        if span < 0.0 {
            return Err(CliError::config(format!(
                "time.t_end = {} lies before the initial time {t0}",
                config.t_end
            )));
        }
        let n_steps = step_count(span, config.dt);
        let t_final = t0 + n_steps as f64 * config.dt;
        if (t_final - config.t_end).abs() > 1e-9 * config.t_end.abs().max(1.0) {
            log::info!("time.t_end = {} is not a whole number of steps; stopping at {t_final}", config.t_end);
        }
        let mut dump_steps = Vec::new();
        for &t in &config.output.dump_times {
            let k = ((t - t0) / config.dt).round();
            if !(0.0..=n_steps as f64).contains(&k) {
                return Err(CliError::config(format!(
                    "output.dump_times: {t} lies outside [{t0}, {t_final}]"
                )));
            }
            dump_steps.push(k as usize);
        }
        dump_steps.sort_unstable();
        dump_steps.dedup();
        let solver = CgpeSolver::new(&grid, params).map_err(|e| CliError::config(e.to_string()))?;
        Ok(Self {
            config: config.clone(),
            solver,
            diagnostics: Diagnostics::new(&grid),
            state,
            n_steps,
            dump_steps,
        })
    }

    pub fn state(&self) -> &CoupledState {
        &self.state
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    fn record(&mut self) -> Result<DiagnosticsRecord> {
        let r = self.diagnostics.record(&self.state, self.solver.params())?;
        log::info!("t = {:.6}  N = {:.15}  E = {:.12}", r.t, r.total_mass, r.energy);
        Ok(r)
    }

    /// Steps to the end, appending one diagnostics row per sample to
    /// `records` and handing the state to `on_dump` at every dump step.
    /// Rows gathered before a failure stay in `records`.
    pub fn execute(
        &mut self,
        records: &mut Vec<DiagnosticsRecord>,
        mut on_dump: impl FnMut(&CoupledState) -> Result<()>,
    ) -> Result<()> {
        let every = self.config.sample_every;
        let mut events: Vec<usize> = self.dump_steps.clone();
        if every > 0 {
            events.extend((every..self.n_steps).step_by(every));
        }
        events.push(self.n_steps);
        events.sort_unstable();
        events.dedup();

        records.push(self.record()?);
        if self.dump_steps.first() == Some(&0) {
            on_dump(&self.state)?;
        }
        let mut done = 0;
        for step in events.into_iter().filter(|&s| s > 0) {
            self.solver.evolve(&mut self.state, step - done, 0, |_| {})?;
            done = step;
            if step == self.n_steps || (every > 0 && step % every == 0) {
                records.push(self.record()?);
            }
            if self.dump_steps.binary_search(&step).is_ok() {
                on_dump(&self.state)?;
            }
        }
        Ok(())
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<DiagnosticsRecord>,
    pub dumps: Vec<PathBuf>,
}

fn dump_path(config: &RunConfig, t: f64) -> PathBuf {
    let frame = match config.output.frame {
        Frame::Lagrangian => "",
        Frame::Eulerian => "_eulerian",
    };
    PathBuf::from(format!("{}{frame}_t{t:.4}.bin", config.output.dump_prefix.display()))
}

/// Runs the configured simulation and writes the time series and dumps.
/// The time series is written even when the run fails part way.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let mut sim = Simulation::prepare(config)?;
    let grid = sim.state().grid().clone();
    let mut records = Vec::new();
    let mut dumps = Vec::new();
    let outcome = sim.execute(&mut records, |state| {
        let t = state.time();
        let fields = match config.output.frame {
            Frame::Lagrangian => state.components().to_vec(),
            Frame::Eulerian => eulerian_frame(state, t, config.omega, &grid)?,
        };
        let path = dump_path(config, t);
        write_grid_dump(&fields, &DumpMetadata { t, omega: config.omega }, &path)?;
        log::info!("wrote {}", path.display());
        dumps.push(path);
        Ok(())
    });
    write_timeseries(&records, &config.output.timeseries)?;
    outcome?;
    Ok(RunSummary { records, dumps })
}
