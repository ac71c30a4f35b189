//! Command-line front end: CSV handling, run configuration, the model
//! document and the subcommands.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod model_file;

pub use error::{CliError, CliResult};
