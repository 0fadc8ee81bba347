pub mod cgpe;
pub mod error;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod output;
pub mod rotating;
mod splitting;
pub mod state;
pub mod vgpe;

pub use error::{Error, Result};
