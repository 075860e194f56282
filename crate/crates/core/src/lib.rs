//! Core econometrics for the global VAR toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`panel`] and [`weights`] hold the country × variable × time data model
//!   and the bilateral weight matrices.
//! * [`regress`] provides least squares and rolling-window fits.
//! * [`stattests`] implements the unit-root, cointegration, causality and
//!   normality tests.
//! * [`var`] estimates single-country VAR(p) systems.
//! * [`gvar`] builds foreign (star) variables, country VARX\*(1,1) models,
//!   link matrices and the solved global system.

pub mod gvar;
pub mod linalg;
pub mod panel;
pub mod regress;
pub mod stattests;
pub mod textio;
pub mod var;
pub mod weights;

use serde::{Deserialize, Serialize};

/// Deterministic terms entering a regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    #[default]
    Constant,
    ConstantTrend,
}

impl Deterministic {
    /// Number of deterministic regressors.
    pub fn n_terms(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Constant => 1,
            Deterministic::ConstantTrend => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Deterministic::None => "none",
            Deterministic::Constant => "constant",
            Deterministic::ConstantTrend => "constant_trend",
        }
    }
}

impl std::fmt::Display for Deterministic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
