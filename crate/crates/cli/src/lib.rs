//! Configuration-driven report pipeline for the global VAR toolkit: unit-root
//! and cointegration tables, rolling regressions, VAR and causality
//! summaries, the classical and Bayesian global models, forecasts and
//! impulse responses.

pub mod chart;
pub mod config;
pub mod emit;
pub mod error;
pub mod pipeline;

pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::{run, run_report, Stage};
