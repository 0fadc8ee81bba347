use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rotbec_cli::config::RunConfig;
use rotbec_cli::converge::{converge, Mode};
use rotbec_cli::run::run;
use rotbec_cli::{verify, CliError, Result};

/// Rotating two-component condensate dynamics.
#[derive(Parser)]
#[command(name = "rotbec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a config file.
    Run { config: PathBuf },
    /// Error table and observed orders for a mesh-size or time-step ladder.
    Converge {
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: LadderMode,
    },
    /// Oracle cross-checks and invariants.
    Verify,
    /// Print the normalized form of a config.
    Normalize { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum LadderMode {
    Spatial,
    Temporal,
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config } => {
            let config = RunConfig::from_file(&config)?;
            let summary = run(&config)?;
            log::info!(
                "{} samples written to {}",
                summary.records.len(),
                config.output.timeseries.display()
            );
        }
        Command::Converge { config, mode } => {
            let config = RunConfig::from_file(&config)?;
            let mode = match mode {
                LadderMode::Spatial => Mode::Spatial,
                LadderMode::Temporal => Mode::Temporal,
            };
            print!("{}", converge(&config, mode)?);
        }
        Command::Verify => {
            let checks = verify::checks()?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(CliError::Verification(format!("{failed} of {} checks", checks.len())));
            }
        }
        Command::Normalize { config } => print!("{}", RunConfig::from_file(&config)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
