//! Simulation harness: truth trajectories, sensor noise, Monte-Carlo runs of
//! the equivariant filter and its baselines, CSV/SVG export.

pub mod checks;
pub mod config;
pub mod error;
pub mod export;
pub mod noise;
pub mod runner;
pub mod truth;

pub use config::{Profile, SimConfig};
pub use error::SimError;
pub use runner::{aggregate, monte_carlo, run_experiment, FilterKind, RunRecord, Summary};
