#![doc = include_str!("../README.md")]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod family;
pub mod formats;
pub mod report;
pub mod sweep;

pub use error::{CliError, CliResult};

/// Crate version with the `git describe` suffix when built from a checkout.
pub const VERSION: &str = env!("ADIASCHED_VERSION");
