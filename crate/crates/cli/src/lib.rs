//! Config-driven experiments on top of [`xxbath`]: presets, sweeps, CSV
//! output, the f-table disk cache and oracle verification.

pub mod cache;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod verify;

pub use cache::TableCache;
pub use config::{load, load_preset, parse, preset_names, Experiment, ExperimentKind, Initial, Overrides, SweepPoint};
pub use error::CliError;
pub use run::{run, PointData, PointResult, RunResult};
