//! Scenario runner for the driven waveguide superlattice simulator.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod sweep;

pub use config::{Axis, Document, Scenario, Tier};
pub use error::CliError;
pub use runner::{evaluate, resolve_drive, run, RunReport};
pub use sweep::{sweep, SweepResult};
