//! Bayesian global VAR: Normal-Gamma shrinkage Gibbs sampler for the
//! country models, posterior draws of the stacked system, convergence and
//! residual diagnostics, forecasts and generalized impulse responses.

pub mod diagnostics;
pub mod drawfile;
pub mod forecast;
pub mod gig;
pub mod girf;
pub mod ng;
pub mod quantile;
pub mod rng;
pub mod sampler;
pub mod wishart;

use bgvar_core::gvar::GvarError;
use thiserror::Error;

pub use ng::{NgPrior, Schedule};
pub use sampler::{filter_stable, sample_posterior, CountryDraw, GlobalDraw, PosteriorDraws};

#[derive(Debug, Error)]
pub enum BayesError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sampler failure at iteration {draw}{}: {message}", country.as_ref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Sampler { draw: usize, country: Option<String>, message: String },
    #[error("{0}")]
    Analysis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Gvar(#[from] GvarError),
    #[error("draw file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
