//! Config parsing, file formats and subcommand drivers for the `optomech` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod spectrum_file;

pub use commands::{run_command, Command, Overrides, Report};
pub use config::{parse_config, parse_config_str, RunConfig};
pub use error::{CliError, Result};
