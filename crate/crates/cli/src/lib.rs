//! Library surface of the `decotrace` command-line tool: scenario-file
//! ingestion, report rendering, and the command pipelines.

pub mod commands;
pub mod error;
pub mod format;
pub mod scenario_file;

pub use commands::{
    run_evolve, run_kernel, run_schmidt, run_sweep, run_threshold, KernelMode, OutputFormat,
};
pub use error::{CliError, Result};
pub use scenario_file::{parse_scenario_file, parse_scenario_str, serialize_scenario};
