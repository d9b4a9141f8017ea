//! Command-line front end: configuration, experiment drivers and outputs.

pub mod config;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod registry;

pub use config::{load_config, LoadedConfig, RunConfig};
pub use error::{CliError, Result};
