//! Command-line harness for `qlab-core`: subcommands per module, a suite
//! runner and deterministic CSV/JSON output.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod ini;
pub mod output;
pub mod registry;
pub mod suite;

pub use cli::run;
pub use error::CliError;
