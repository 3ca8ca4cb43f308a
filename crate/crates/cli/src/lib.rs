//! Command implementations behind the `flatconv` binary.

pub mod args;
pub mod commands;
