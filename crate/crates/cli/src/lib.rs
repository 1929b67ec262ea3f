//! Command-line front end: CSV loading, result formatting and the `fit`,
//! `cv`, `simulate` and `example` subcommands.

pub mod args;
pub mod commands;
pub mod data;
pub mod example;
pub mod output;

pub use commands::{run, CliError, ErrorKind};
pub use data::{load_csv, parse_csv, DataError};
pub use output::{emit_table, format_sig, Format, Table};
