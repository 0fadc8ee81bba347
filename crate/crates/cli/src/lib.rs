//! Batch front end for the `rotbec` solver: configuration, presets, runs,
//! convergence studies and self-verification.

pub mod config;
pub mod converge;
pub mod error;
pub mod initial;
pub mod presets;
pub mod run;
pub mod verify;

pub use error::{CliError, Result};
