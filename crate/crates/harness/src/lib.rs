//! Experiment runner for the doped-circuit study: configuration, seeded
//! ensembles, and CSV / JSON / PGM output for each experiment.

pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod pipeline;

pub use config::{DopingLevel, ExperimentConfig};
pub use error::{HarnessError, Result};
