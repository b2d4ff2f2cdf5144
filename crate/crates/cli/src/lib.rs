//! Command-line front end: configuration parsing, parameter sweeps and CSV
//! output for the `effcap` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, Mode, RunConfig};
pub use run::{compute, run, RunError, Table};
