use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{check_finite, check_not_constant, mackinnon_pvalue, NullHypothesis, StatTestError, TestResult};
use crate::linalg;
use crate::Deterministic;

/// Bartlett truncation lag `⌊4 (T/100)^{1/4}⌋`.
pub fn newey_west_lag(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Phillips-Perron Z-tau test of a unit root with a Newey-West long-run
/// variance correction.
pub fn pp_test(series: &[f64], det: Deterministic) -> Result<TestResult, StatTestError> {
    check_finite(series)?;
    if series.len() < 11 {
        return Err(StatTestError::InsufficientData { n: series.len(), required: 11 });
    }
    check_not_constant(series)?;
    let n = series.len() - 1;
    let k = 1 + det.n_terms();
    let x = DMatrix::from_fn(n, k, |r, c| match c {
        0 => series[r],
        1 => 1.0,
        _ => (r + 1) as f64,
    });
    let dy = DMatrix::from_fn(n, 1, |r, _| series[r + 1] - series[r]);
    let ls = linalg::least_squares(&x, &dy).map_err(|e| match e {
        linalg::LinalgError::RankDeficient { column: 0 } => {
            StatTestError::Degenerate("lagged level is collinear with the deterministic terms".into())
        }
        other => other.into(),
    })?;
    let u: Vec<f64> = ls.residuals.iter().copied().collect();
    let rss: f64 = u.iter().map(|e| e * e).sum();
    if rss == 0.0 {
        return Err(StatTestError::Degenerate("zero residual variance".into()));
    }
    let t = n as f64;
    let s2 = rss / (n - k) as f64;
    let se = (s2 * ls.xtx_inv[(0, 0)]).sqrt();
    let t_rho = ls.coef[(0, 0)] / se;

    let gamma = |j: usize| u[j..].iter().zip(&u[..n - j]).map(|(a, b)| a * b).sum::<f64>() / t;
    let gamma0 = gamma(0);
    let lag = newey_west_lag(n);
    let mut lrv = gamma0;
    for j in 1..=lag {
        lrv += 2.0 * (1.0 - j as f64 / (lag as f64 + 1.0)) * gamma(j);
    }
    if lrv <= 0.0 {
        return Err(StatTestError::Numerical("nonpositive long-run variance".into()));
    }
    let z_tau = (gamma0 / lrv).sqrt() * t_rho - 0.5 * (lrv - gamma0) / lrv.sqrt() * (t * se / s2.sqrt());
    let p = mackinnon_pvalue(z_tau, det);
    let nuisance = BTreeMap::from([
        ("bandwidth".to_string(), lag.to_string()),
        ("deterministic".to_string(), det.to_string()),
        ("nobs".to_string(), n.to_string()),
    ]);
    Ok(TestResult::new(z_tau, p, NullHypothesis::UnitRoot, nuisance))
}
