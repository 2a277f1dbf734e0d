//! Command implementations behind the `linelayout` binary.

pub mod commands;
pub mod config;
pub mod headcheck;
pub mod synth;
