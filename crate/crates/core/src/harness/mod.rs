//! Experiment plumbing: config files, sweeps, CSV output and the CLI.

pub mod cli;
pub mod config;
pub mod csv;
pub mod sweep;
pub mod validate;

pub use config::{parse_config, SimConfig};
pub use csv::{emit_csv, parse_csv};
pub use sweep::{run_sweep, run_sweep_with, SweepResult, SweepRow};
pub use validate::{validate_channel, Check};
