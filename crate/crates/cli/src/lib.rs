//! Command-line front end: experiment configuration, campaign execution and
//! result files.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run_cli, Cli, Command};
pub use config::{BuiltinGame, ExperimentConfig, SpecSource};
