//! Unit-root, cointegration, causality and normality tests.
//!
//! Unit-root tests use the conventional null of a unit root: rejecting it
//! marks the series as stationary.

mod adf;
mod granger;
mod johansen;
mod mackinnon;
mod normality;
mod pp;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adf::{adf_test, AdfOptions, LagSelection};
pub use granger::granger_test;
pub use johansen::{johansen_trace, trace_critical_values, CointDeterministic, JohansenResult};
pub use mackinnon::mackinnon_pvalue;
pub use normality::jarque_bera;
pub use pp::{newey_west_lag, pp_test};

use crate::linalg::LinalgError;

/// Significance levels reported for every test.
pub const LEVELS: [f64; 3] = [0.10, 0.05, 0.01];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatTestError {
    #[error("insufficient data: {n} observations, need at least {required}")]
    InsufficientData { n: usize, required: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<LinalgError> for StatTestError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient { .. } | LinalgError::NotPositiveDefinite | LinalgError::Singular => {
                StatTestError::RankDeficient(e.to_string())
            }
            LinalgError::Dimension(m) => StatTestError::Config(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullHypothesis {
    UnitRoot,
    NoGrangerCausality,
    Normality,
    NoCointegration,
}

impl NullHypothesis {
    pub fn code(self) -> &'static str {
        match self {
            NullHypothesis::UnitRoot => "unit_root",
            NullHypothesis::NoGrangerCausality => "no_granger_causality",
            NullHypothesis::Normality => "normality",
            NullHypothesis::NoCointegration => "no_cointegration",
        }
    }
}

/// Outcome of a scalar hypothesis test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub null_hypothesis: NullHypothesis,
    /// `(level, rejected)` for each of [`LEVELS`].
    pub decisions: Vec<(f64, bool)>,
    /// Auxiliary values such as the lag order or deterministic terms used.
    pub nuisance: BTreeMap<String, String>,
}

impl TestResult {
    pub(crate) fn new(
        statistic: f64,
        p_value: f64,
        null_hypothesis: NullHypothesis,
        nuisance: BTreeMap<String, String>,
    ) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        let decisions = LEVELS.iter().map(|&a| (a, p_value <= a)).collect();
        TestResult { statistic, p_value, null_hypothesis, decisions, nuisance }
    }

    pub fn rejects(&self, level: f64) -> bool {
        self.p_value <= level
    }

    /// `***` at 1%, `**` at 5%, `*` at 10%.
    pub fn stars(&self) -> &'static str {
        stars(self.p_value)
    }
}

pub fn stars(p: f64) -> &'static str {
    if p <= 0.01 {
        "***"
    } else if p <= 0.05 {
        "**"
    } else if p <= 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityVerdict {
    Stationary,
    /// Unit root rejected only once a linear trend is allowed for.
    TrendStationary,
    NonStationary,
}

/// Combine a constant-only and a constant-plus-trend unit-root test.
pub fn stationarity_verdict(constant: &TestResult, with_trend: &TestResult, level: f64) -> StationarityVerdict {
    if constant.rejects(level) {
        StationarityVerdict::Stationary
    } else if with_trend.rejects(level) {
        StationarityVerdict::TrendStationary
    } else {
        StationarityVerdict::NonStationary
    }
}

pub(crate) fn check_finite(series: &[f64]) -> Result<(), StatTestError> {
    match series.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(StatTestError::Degenerate(format!("non-finite value at position {i}"))),
        None => Ok(()),
    }
}

pub(crate) fn check_not_constant(series: &[f64]) -> Result<(), StatTestError> {
    let first = series[0];
    if series.iter().all(|v| *v == first) {
        Err(StatTestError::Degenerate("series is constant".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decisions_follow_p_value() {
        let r = TestResult::new(1.0, 0.03, NullHypothesis::UnitRoot, BTreeMap::new());
        assert_eq!(r.decisions, vec![(0.10, true), (0.05, true), (0.01, false)]);
        assert_eq!(r.stars(), "**");
        assert_eq!(stars(0.5), "");
        assert_eq!(stars(0.1), "*");
        assert_eq!(stars(0.005578), "***");
    }
}
