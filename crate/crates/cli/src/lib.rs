//! Batch front end: build models, print corpus statistics, rank candidate
//! translations and compare the rankings with human judgments.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::CliError;
