//! Corpus files, reports, and the `namefit` command line on top of
//! `namefit-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod io;
pub mod manifest;
pub mod parallel;
pub mod report;

pub use cli::run;
pub use error::{CliError, CliResult};
