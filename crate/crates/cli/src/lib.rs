//! Experiment driver for gramscope: config parsing, experiment pipelines and
//! artifact output.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run, Outcome, SeedResult};
