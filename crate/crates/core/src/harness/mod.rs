//! Experiment configuration, Monte Carlo runs, CSV output and the CLI.

pub mod cli;
pub mod config;
pub mod csv;
pub mod experiments;

pub use config::ExperimentConfig;
pub use csv::{CsvRow, Source};
pub use experiments::{
    run_codec_experiment, run_theory_sweep, validate_theory, CodecScheme, PracticalSetup,
    TheorySweep, ValidationReport,
};
