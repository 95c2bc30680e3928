//! Batch front-end for lmpo-core: parameter files, runs, sweeps and oracle comparison.

pub mod commands;
pub mod output;
pub mod runspec;

pub use commands::{compare, info, run, run_file, sweep, CliError, CompareReport, RunSummary, Status};
pub use runspec::{parse_runspec, parse_runspec_for, Engine, Field, PairField, ParseError, RunSpec};
