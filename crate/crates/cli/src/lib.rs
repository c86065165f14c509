//! File formats and command-line front-end for `rjdrift-core`.
//!
//! Paths are exchanged as `t,x` CSV files, fit results as CSV tables plus a JSON
//! metadata file. Every output starts with a `# seed=… config_hash=…` line.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{run, Cli};
pub use config::RunConfig;
pub use error::CliError;
