//! Command-line front end: `run`, `compare` and `verify`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod selector;
pub mod settings;

pub use cli::{execute, Cli};
pub use error::{code, CliError, CliResult};
