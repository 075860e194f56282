use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{check_finite, check_not_constant, mackinnon_pvalue, NullHypothesis, StatTestError, TestResult};
use crate::linalg;
use crate::Deterministic;

/// How the number of lagged differences is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LagSelection {
    /// Use exactly `max_lag` lagged differences.
    #[default]
    Fixed,
    Aic,
    Bic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfOptions {
    pub max_lag: usize,
    pub selection: LagSelection,
    pub deterministic: Deterministic,
}

impl Default for AdfOptions {
    fn default() -> Self {
        AdfOptions { max_lag: 1, selection: LagSelection::Fixed, deterministic: Deterministic::Constant }
    }
}

struct AdfFit {
    tau: f64,
    rss: f64,
    nobs: usize,
    ncols: usize,
}

/// Regress Δy on the lagged level, deterministic terms and `lags` lagged
/// differences, using Δy observations from index `start` onward.
fn fit(y: &[f64], lags: usize, start: usize, det: Deterministic) -> Result<AdfFit, StatTestError> {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (start..dy.len()).collect();
    let ncols = 1 + det.n_terms() + lags;
    let nobs = rows.len();
    if nobs <= ncols {
        return Err(StatTestError::InsufficientData { n: y.len(), required: ncols + start + 2 });
    }
    let x = DMatrix::from_fn(nobs, ncols, |r, c| {
        let i = rows[r];
        match c {
            0 => y[i],
            c if c <= det.n_terms() => {
                if c == 1 {
                    1.0
                } else {
                    (i + 1) as f64
                }
            }
            c => dy[i - (c - det.n_terms())],
        }
    });
    let resp = DMatrix::from_fn(nobs, 1, |r, _| dy[rows[r]]);
    let ls = linalg::least_squares(&x, &resp).map_err(|e| match e {
        linalg::LinalgError::RankDeficient { column: 0 } => {
            StatTestError::Degenerate("lagged level is collinear with the deterministic terms".into())
        }
        other => other.into(),
    })?;
    let rss: f64 = ls.residuals.iter().map(|e| e * e).sum();
    let sigma2 = rss / (nobs - ncols) as f64;
    let se = (sigma2 * ls.xtx_inv[(0, 0)]).sqrt();
    if se == 0.0 {
        return Err(StatTestError::Degenerate("zero residual variance".into()));
    }
    Ok(AdfFit { tau: ls.coef[(0, 0)] / se, rss, nobs, ncols })
}

/// Augmented Dickey-Fuller test of a unit root.
pub fn adf_test(series: &[f64], opts: &AdfOptions) -> Result<TestResult, StatTestError> {
    check_finite(series)?;
    let required = opts.max_lag + 11;
    if series.len() < required {
        return Err(StatTestError::InsufficientData { n: series.len(), required });
    }
    check_not_constant(series)?;
    let lags = match opts.selection {
        LagSelection::Fixed => opts.max_lag,
        LagSelection::Aic | LagSelection::Bic => {
            let mut best = (f64::INFINITY, 0);
            for p in 0..=opts.max_lag {
                let f = fit(series, p, opts.max_lag, opts.deterministic)?;
                let n = f.nobs as f64;
                let penalty = if opts.selection == LagSelection::Aic { 2.0 } else { n.ln() };
                let ic = n * (f.rss / n).ln() + penalty * f.ncols as f64;
                if ic < best.0 {
                    best = (ic, p);
                }
            }
            best.1
        }
    };
    let f = fit(series, lags, lags, opts.deterministic)?;
    let p = mackinnon_pvalue(f.tau, opts.deterministic);
    let nuisance = BTreeMap::from([
        ("lags".to_string(), lags.to_string()),
        ("deterministic".to_string(), opts.deterministic.to_string()),
        ("nobs".to_string(), f.nobs.to_string()),
    ]);
    Ok(TestResult::new(f.tau, p, NullHypothesis::UnitRoot, nuisance))
}
