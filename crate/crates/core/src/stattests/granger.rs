use std::collections::BTreeMap;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{check_finite, NullHypothesis, StatTestError, TestResult};
use crate::linalg;

/// F-test that `lag` lags of `cause` add nothing to an autoregression of
/// `effect` on its own `lag` lags (both with an intercept).
pub fn granger_test(cause: &[f64], effect: &[f64], lag: usize) -> Result<TestResult, StatTestError> {
    if cause.len() != effect.len() {
        return Err(StatTestError::Config(format!("series lengths differ ({} vs {})", cause.len(), effect.len())));
    }
    if lag == 0 {
        return Err(StatTestError::Config("lag must be at least 1".into()));
    }
    check_finite(cause)?;
    check_finite(effect)?;
    let n = effect.len();
    let n_params = 2 * lag + 1;
    if n <= lag + n_params {
        return Err(StatTestError::InsufficientData { n, required: lag + n_params + 1 });
    }
    let nobs = n - lag;
    let y = DMatrix::from_fn(nobs, 1, |r, _| effect[r + lag]);
    let unrestricted = DMatrix::from_fn(nobs, n_params, |r, c| {
        let t = r + lag;
        match c {
            0 => 1.0,
            c if c <= lag => effect[t - c],
            c => cause[t - (c - lag)],
        }
    });
    let restricted = unrestricted.columns(0, lag + 1).into_owned();
    let rss = |x: &DMatrix<f64>| -> Result<f64, StatTestError> {
        let ls = linalg::least_squares(x, &y).map_err(|e| match e {
            linalg::LinalgError::RankDeficient { column } => StatTestError::Degenerate(format!(
                "regressor {column} of the causality regression is collinear with earlier ones"
            )),
            other => other.into(),
        })?;
        Ok(ls.residuals.iter().map(|e| e * e).sum())
    };
    let rss_r = rss(&restricted)?;
    let rss_u = rss(&unrestricted)?;
    let df2 = (nobs - n_params) as f64;
    let (f, p) = if rss_u == 0.0 {
        if rss_r == 0.0 {
            return Err(StatTestError::Degenerate("effect is perfectly explained by its own lags".into()));
        }
        (f64::INFINITY, 0.0)
    } else {
        let f = ((rss_r - rss_u).max(0.0) / lag as f64) / (rss_u / df2);
        let dist = FisherSnedecor::new(lag as f64, df2).map_err(|e| StatTestError::Numerical(e.to_string()))?;
        (f, dist.sf(f))
    };
    let nuisance = BTreeMap::from([
        ("lag".to_string(), lag.to_string()),
        ("df_num".to_string(), lag.to_string()),
        ("df_den".to_string(), (nobs - n_params).to_string()),
    ]);
    Ok(TestResult::new(f, p, NullHypothesis::NoGrangerCausality, nuisance))
}
