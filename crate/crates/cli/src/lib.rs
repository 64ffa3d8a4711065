//! Command implementations behind the `egoseg` binary.
//!
//! Each subcommand is a plain function taking paths and an effective
//! [`RunConfig`], so the binary and the tests share one code path.

pub mod commands;
pub mod config;
mod error;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};
