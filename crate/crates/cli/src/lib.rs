//! Configuration, subcommands and artifact writing behind the `ctoe`
//! binary.

pub mod artifacts;
pub mod commands;
pub mod config;
