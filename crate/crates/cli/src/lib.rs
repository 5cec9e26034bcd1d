//! Scenario runner for the reference-system calculus.
//!
//! [`config`] turns flags and config files into a [`config::ScenarioSpec`],
//! [`report::run`] evaluates it, and [`emit`] writes the result as CSV or JSON.

// Index loops mirror the subscripted formulas.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod emit;
pub mod report;

pub use config::{parse_config, ConfigError, Format, Scenario, ScenarioSpec};
pub use report::{run, RunReport};
