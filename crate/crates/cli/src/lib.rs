//! Configuration, file output and subcommands of the `talbot` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod noise;
pub mod output;

pub use commands::{run, Command};
pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
