//! Command-line front end: argument parsing, the subcommands and the
//! `reproduce` cases.

pub mod commands;
pub mod config;
pub mod fixtures;
pub mod reproduce;

/// Usage, file and parse errors.
pub const EXIT_USAGE: u8 = 64;
