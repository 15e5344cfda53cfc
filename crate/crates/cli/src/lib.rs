//! Sweeps, comparisons and figures for the `phasevar` command.

pub mod check;
pub mod compare;
pub mod config;
pub mod output;
pub mod sweep;
