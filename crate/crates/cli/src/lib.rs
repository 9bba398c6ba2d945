//! Library side of the `nlgreen` command: argument handling, run
//! configuration and subcommands.

pub mod args;
pub mod commands;
pub mod config;

pub use args::run;
