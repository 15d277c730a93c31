//! Command-line front end: configuration, output files and the subcommands.

pub mod commands;
pub mod config;
pub mod output;
