//! Parameter sweeps and the verification suite for `perispline`, behind the
//! `perispline` command-line tool.

pub mod cli;
pub mod commands;
pub mod config;
pub mod report;
pub mod verify;
