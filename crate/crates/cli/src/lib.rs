//! Command-line driver: parses a [`RunConfig`], runs one command and writes
//! its CSV/JSON tables plus a JSON run report.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check, 2 on a
//! configuration error, 3 on an I/O error.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, Format, RunConfig, Seeds};
pub use error::CliError;
pub use run::{execute, run, Check, Outcome, RunReport};
