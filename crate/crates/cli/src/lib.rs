//! Command implementations and the HTTP recommendation service behind the
//! `entrec` binary.

pub mod commands;
pub mod serve;
