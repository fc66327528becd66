//! Command-line front end for `bootbias`: JSON experiment configs, CSV and
//! JSON results, and an SVG rate chart.

pub mod commands;
pub mod config;
pub mod emit;
pub mod selftest;
pub mod svg;

pub use commands::{CliError, RunOptions, EXIT_CONFIG, EXIT_EXPERIMENT, EXIT_IO, EXIT_OK};
pub use config::{CliConfigFile, LoadedConfig};
