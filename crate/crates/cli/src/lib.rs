//! Experiment harness for the graph SPDE solver: configuration, sweep
//! runners, rate regression and CSV reports. The binary in `main.rs` is a
//! thin argument-parsing layer over this library.

// Comparisons are deliberately written negated so NaN parameters fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;
pub mod setup;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("need at least 3 usable levels, got {0}")]
    InsufficientLevels(usize),
    #[error("Monte Carlo ensemble too weak: {0}")]
    InsufficientSeeds(String),
    #[error("weight does not decay fast enough for truncation: {0}")]
    GammaTooFat(String),
    #[error(transparent)]
    Core(#[from] gspde_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
