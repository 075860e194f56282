use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::StatTestError;
use crate::linalg;

/// Deterministic specification of the error-correction model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CointDeterministic {
    None,
    /// Constant restricted to the cointegrating space.
    #[default]
    RestrictedConstant,
    /// Unrestricted constant.
    Constant,
    /// Unrestricted constant and linear trend.
    ConstantTrend,
}

impl CointDeterministic {
    pub fn as_str(self) -> &'static str {
        match self {
            CointDeterministic::None => "none",
            CointDeterministic::RestrictedConstant => "restricted_constant",
            CointDeterministic::Constant => "constant",
            CointDeterministic::ConstantTrend => "constant_trend",
        }
    }
}

// Trace-test critical values at (90%, 95%, 99%), indexed by the number of
// common stochastic trends k - r = 1..=5.
//
// None / Constant / ConstantTrend: MacKinnon, Haug & Michelis (1999), as
// tabulated for det_order = -1, 0, 1 in statsmodels' `c_sjt`.
// RestrictedConstant: Osterwald-Lenum (1992) Table 1*, as used by urca's ca.jo.
const CV_NONE: [[f64; 3]; 5] = [
    [2.9762, 4.1296, 6.9406],
    [10.4741, 12.3212, 16.3640],
    [21.7781, 24.2761, 29.5147],
    [37.0339, 40.1749, 46.5716],
    [56.2839, 60.0627, 67.6367],
];
const CV_RESTRICTED_CONSTANT: [[f64; 3]; 5] =
    [[7.52, 9.24, 12.97], [17.85, 19.96, 24.60], [32.00, 34.91, 41.07], [49.65, 53.12, 60.16], [71.86, 76.07, 84.45]];
const CV_CONSTANT: [[f64; 3]; 5] = [
    [2.7055, 3.8415, 6.6349],
    [13.4294, 15.4943, 19.9349],
    [27.0669, 29.7961, 35.4628],
    [44.4929, 47.8545, 54.6815],
    [65.8202, 69.8189, 77.8202],
];
const CV_CONSTANT_TREND: [[f64; 3]; 5] = [
    [2.7055, 3.8415, 6.6349],
    [16.1619, 18.3985, 23.1485],
    [32.0645, 35.0116, 41.0815],
    [51.6492, 55.2459, 62.5202],
    [75.1027, 79.3422, 87.7748],
];

/// Largest system dimension with tabulated critical values.
pub const MAX_DIMENSION: usize = 5;

/// Critical values `(90%, 95%, 99%)` for `n_trends = k - r` common trends.
pub fn trace_critical_values(n_trends: usize, det: CointDeterministic) -> Option<[f64; 3]> {
    let table = match det {
        CointDeterministic::None => &CV_NONE,
        CointDeterministic::RestrictedConstant => &CV_RESTRICTED_CONSTANT,
        CointDeterministic::Constant => &CV_CONSTANT,
        CointDeterministic::ConstantTrend => &CV_CONSTANT_TREND,
    };
    n_trends.checked_sub(1).and_then(|i| table.get(i)).copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohansenResult {
    /// Squared canonical correlations, descending.
    pub eigenvalues: Vec<f64>,
    /// Trace statistic for the null `rank ≤ r`, `r = 0 … k-1`.
    pub trace_stats: Vec<f64>,
    /// `(90%, 95%, 99%)` critical values per rank.
    pub critical_values: Vec<[f64; 3]>,
    /// Rank selected at the 5% level.
    pub selected_rank: usize,
    pub nobs: usize,
    pub lag_diffs: usize,
    pub deterministic: CointDeterministic,
}

fn level_index(level: f64) -> Option<usize> {
    [0.10, 0.05, 0.01].iter().position(|l| (l - level).abs() < 1e-12)
}

impl JohansenResult {
    /// Whether `rank ≤ r` is rejected at `level` ∈ {0.10, 0.05, 0.01}.
    pub fn rejects(&self, r: usize, level: f64) -> bool {
        let i = level_index(level).expect("level must be 0.10, 0.05 or 0.01");
        self.trace_stats[r] > self.critical_values[r][i]
    }

    /// Smallest rank whose null is not rejected at `level`.
    pub fn selected_rank_at(&self, level: f64) -> usize {
        (0..self.trace_stats.len()).find(|&r| !self.rejects(r, level)).unwrap_or(self.trace_stats.len())
    }

    /// Significance stars for the `rank = r` null.
    pub fn stars(&self, r: usize) -> &'static str {
        if self.rejects(r, 0.01) {
            "***"
        } else if self.rejects(r, 0.05) {
            "**"
        } else if self.rejects(r, 0.10) {
            "*"
        } else {
            ""
        }
    }
}

/// Johansen trace test on the columns of `data` (`T × k`), with `lag_diffs`
/// lagged differences in the error-correction model.
pub fn johansen_trace(
    data: &DMatrix<f64>,
    lag_diffs: usize,
    det: CointDeterministic,
) -> Result<JohansenResult, StatTestError> {
    let (t, k) = data.shape();
    if k < 2 {
        return Err(StatTestError::Config("the trace test needs at least two series".into()));
    }
    if k > MAX_DIMENSION {
        return Err(StatTestError::Config(format!(
            "critical values are tabulated for at most {MAX_DIMENSION} series, got {k}"
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(StatTestError::Degenerate("non-finite value".into()));
    }
    let n_short = k * lag_diffs
        + match det {
            CointDeterministic::Constant => 1,
            CointDeterministic::ConstantTrend => 2,
            _ => 0,
        };
    let required = lag_diffs + 2 + n_short + k + 10;
    if t < required {
        return Err(StatTestError::InsufficientData { n: t, required });
    }
    let nobs = t - 1 - lag_diffs;
    // Observation r corresponds to time index s = r + lag_diffs + 1.
    let dy = |s: usize, j: usize| data[(s, j)] - data[(s - 1, j)];
    let z0 = DMatrix::from_fn(nobs, k, |r, j| dy(r + lag_diffs + 1, j));
    let k1 = if det == CointDeterministic::RestrictedConstant { k + 1 } else { k };
    let z1 = DMatrix::from_fn(nobs, k1, |r, j| if j < k { data[(r + lag_diffs, j)] } else { 1.0 });
    let z2 = DMatrix::from_fn(nobs, n_short, |r, c| {
        let s = r + lag_diffs + 1;
        if c < k * lag_diffs {
            let (l, j) = (c / k + 1, c % k);
            dy(s - l, j)
        } else if c == k * lag_diffs {
            1.0
        } else {
            s as f64
        }
    });
    let (r0, r1) = if n_short > 0 {
        let a = linalg::least_squares(&z2, &z0)?;
        let b = linalg::least_squares(&z2, &z1)?;
        (a.residuals, b.residuals)
    } else {
        (z0, z1)
    };
    let scale = 1.0 / nobs as f64;
    let s00 = r0.transpose() * &r0 * scale;
    let s11 = r1.transpose() * &r1 * scale;
    let s01 = r0.transpose() * &r1 * scale;
    let rank_err =
        |what: &str| StatTestError::RankDeficient(format!("{what} moment matrix is singular; series are collinear"));
    let s00_inv = linalg::spd_inverse(&s00).map_err(|_| rank_err("differenced"))?;
    check_conditioning(&s00).map_err(|_| rank_err("differenced"))?;
    check_conditioning(&s11).map_err(|_| rank_err("lagged-level"))?;
    let l = linalg::cholesky(&s11).map_err(|_| rank_err("lagged-level"))?.l();
    let inner = s01.transpose() * &s00_inv * &s01;
    let l_inv = l.solve_lower_triangular(&DMatrix::identity(k1, k1)).ok_or_else(|| rank_err("lagged-level"))?;
    let m = linalg::symmetrize(&(&l_inv * inner * l_inv.transpose()));
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().map(|v| v.clamp(0.0, 1.0 - 1e-15)).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig.truncate(k);
    let trace_stats: Vec<f64> =
        (0..k).map(|r| -(nobs as f64) * eig[r..].iter().map(|l| (1.0 - l).ln()).sum::<f64>()).collect();
    let critical_values: Vec<[f64; 3]> =
        (0..k).map(|r| trace_critical_values(k - r, det).expect("dimension checked above")).collect();
    let mut result = JohansenResult {
        eigenvalues: eig,
        trace_stats,
        critical_values,
        selected_rank: 0,
        nobs,
        lag_diffs,
        deterministic: det,
    };
    result.selected_rank = result.selected_rank_at(0.05);
    Ok(result)
}

fn check_conditioning(s: &DMatrix<f64>) -> Result<(), ()> {
    let ev = s.symmetric_eigenvalues();
    let max = ev.iter().copied().fold(0.0, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 || min <= max * 1e-12 {
        Err(())
    } else {
        Ok(())
    }
}
