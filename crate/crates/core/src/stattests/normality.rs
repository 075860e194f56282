use std::collections::BTreeMap;

use super::{check_finite, NullHypothesis, StatTestError, TestResult};

/// Jarque-Bera normality test with a χ²(2) p-value.
pub fn jarque_bera(residuals: &[f64]) -> Result<TestResult, StatTestError> {
    check_finite(residuals)?;
    let n = residuals.len();
    if n < 8 {
        return Err(StatTestError::InsufficientData { n, required: 8 });
    }
    let nf = n as f64;
    let mean = residuals.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in residuals {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 == 0.0 {
        return Err(StatTestError::Degenerate("residuals have zero variance".into()));
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let jb = nf / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    // χ²(2) survival function.
    let p = (-jb / 2.0).exp();
    let nuisance =
        BTreeMap::from([("skewness".to_string(), format!("{skew}")), ("kurtosis".to_string(), format!("{kurt}"))]);
    Ok(TestResult::new(jb, p, NullHypothesis::Normality, nuisance))
}
