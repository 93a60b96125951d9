//! Experiment harness: subcommands and manifest pipelines over `epitrace`.

pub mod app;
pub mod error;
pub mod manifest;
pub mod pipeline;

pub use error::{CliError, CliResult};
