//! Library side of the `multirabi` command-line tool: configuration parsing,
//! solver dispatch and report formatting.

pub mod commands;
pub mod config;
pub mod error;
pub mod solve;

pub use config::{ConfigFile, Format, Overrides, RunConfig, Solver};
pub use error::CliError;
