//! Configuration, subcommands and file output for the `chimera` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{execute, Command, SweepRun};
pub use config::{Overrides, RunConfig, SCHEMA_VERSION};
pub use error::CliError;
