//! Convergence and residual diagnostics of a posterior sample.

use bgvar_core::gvar::{build_star, varx_design, varx_labels};
use bgvar_core::linalg;
use bgvar_core::panel::Panel;
use bgvar_core::regress::ols_simple;
use bgvar_core::weights::WeightMatrix;
use nalgebra::DMatrix;

use crate::sampler::PosteriorDraws;
use crate::BayesError;

/// Fraction of the chain compared at the start and at the end.
pub const GEWEKE_FIRST: f64 = 0.1;
pub const GEWEKE_LAST: f64 = 0.5;
/// Two-sided 5% critical value of the standard normal.
pub const Z_CRITICAL: f64 = 1.96;

/// Spectral density at frequency zero with a Bartlett window and bandwidth
/// `⌊4 (n/100)^{2/9}⌋`.
pub fn spectral_density_zero(x: &[f64]) -> f64 {
    let n = x.len();
    let mean = linalg::mean(x);
    let autocov = |lag: usize| -> f64 { (lag..n).map(|t| (x[t] - mean) * (x[t - lag] - mean)).sum::<f64>() / n as f64 };
    let bandwidth = (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize;
    let mut s = autocov(0);
    for l in 1..=bandwidth.min(n - 1) {
        s += 2.0 * (1.0 - l as f64 / (bandwidth as f64 + 1.0)) * autocov(l);
    }
    s.max(0.0)
}

/// Geweke z-score comparing the means of the first and last segments of a
/// chain. `None` when either segment has zero variance.
pub fn geweke_z(chain: &[f64]) -> Option<f64> {
    let n = chain.len();
    let na = ((n as f64) * GEWEKE_FIRST).floor() as usize;
    let nb = ((n as f64) * GEWEKE_LAST).floor() as usize;
    if na < 2 || nb < 2 {
        return None;
    }
    let a = &chain[..na];
    let b = &chain[n - nb..];
    let (sa, sb) = (spectral_density_zero(a), spectral_density_zero(b));
    if sa <= 0.0 || sb <= 0.0 {
        return None;
    }
    let z = (linalg::mean(a) - linalg::mean(b)) / (sa / na as f64 + sb / nb as f64).sqrt();
    z.is_finite().then_some(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeReport {
    /// Parameter labels `country/equation/regressor` with their z-scores.
    pub scores: Vec<(String, f64)>,
    /// Parameters skipped because their chain has zero variance.
    pub excluded: Vec<String>,
}

impl GewekeReport {
    pub fn n_exceed(&self) -> usize {
        self.scores.iter().filter(|(_, z)| z.abs() > Z_CRITICAL).count()
    }

    pub fn exceed_fraction(&self) -> f64 {
        if self.scores.is_empty() {
            0.0
        } else {
            self.n_exceed() as f64 / self.scores.len() as f64
        }
    }
}

/// Geweke scores of every country coefficient across the retained draws.
pub fn geweke_diag(draws: &PosteriorDraws) -> GewekeReport {
    let det = draws.deterministic;
    let vars = &draws.layout.variables;
    let labels = varx_labels(vars, vars, det);
    let coefs: Vec<Vec<DMatrix<f64>>> =
        draws.draws.iter().map(|d| d.countries.iter().map(|c| c.coef_matrix(det)).collect()).collect();
    let mut report = GewekeReport { scores: Vec::new(), excluded: Vec::new() };
    for (ci, country) in draws.layout.countries.iter().enumerate() {
        for (eq, var) in vars.iter().enumerate() {
            for (r, reg) in labels.iter().enumerate() {
                let chain: Vec<f64> = coefs.iter().map(|d| d[ci][(r, eq)]).collect();
                let label = format!("{country}/{var}/{reg}");
                match geweke_z(&chain) {
                    Some(z) => report.scores.push((label, z)),
                    None => report.excluded.push(label),
                }
            }
        }
    }
    report
}

/// Counts of p-values in the buckets `> 0.10`, `(0.05, 0.10]`,
/// `(0.01, 0.05]` and `≤ 0.01`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PValueBuckets(pub [usize; 4]);

impl PValueBuckets {
    pub const LABELS: [&'static str; 4] = ["p>0.10", "0.05<p<=0.10", "0.01<p<=0.05", "p<=0.01"];

    pub fn add(&mut self, p: f64) {
        let i = if p > 0.10 {
            0
        } else if p > 0.05 {
            1
        } else if p > 0.01 {
            2
        } else {
            3
        };
        self.0[i] += 1;
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Counts of mean absolute correlations in the buckets `< 0.1`,
/// `[0.1, 0.2)`, `[0.2, 0.5]` and `> 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorrBuckets(pub [usize; 4]);

impl CorrBuckets {
    pub const LABELS: [&'static str; 4] = ["<0.1", "0.1-0.2", "0.2-0.5", ">0.5"];

    pub fn add(&mut self, c: f64) {
        let i = if c < 0.1 {
            0
        } else if c < 0.2 {
            1
        } else if c <= 0.5 {
            2
        } else {
            3
        };
        self.0[i] += 1;
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// `100·count/total` rounded to two decimals.
pub fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    (10_000.0 * count as f64 / total as f64).round() / 100.0
}

/// p-value of the F-test that `e_t` does not depend on `e_{t−1}` in a
/// regression with an intercept.
pub fn autocorr_ftest(residuals: &[f64]) -> Result<f64, BayesError> {
    if residuals.len() < 4 {
        return Err(BayesError::Degenerate(format!(
            "{} residuals are too few for the autocorrelation test",
            residuals.len()
        )));
    }
    let n = residuals.len();
    let fit = ols_simple(&residuals[..n - 1], &residuals[1..])
        .map_err(|e| BayesError::Degenerate(format!("autocorrelation regression: {e}")))?;
    Ok(fit.f_pvalue)
}

/// Bucketed autocorrelation p-values of every residual column.
pub fn residual_autocorr_buckets(residuals: &[DMatrix<f64>]) -> Result<PValueBuckets, BayesError> {
    let mut b = PValueBuckets::default();
    for block in residuals {
        for col in block.column_iter() {
            let series: Vec<f64> = col.iter().copied().collect();
            b.add(autocorr_ftest(&series)?);
        }
    }
    Ok(b)
}

/// Average absolute correlation of each country's residual for a variable
/// with the same variable's residual in every other country
/// (`countries × variables`).
pub fn cross_unit_mean_abs_corr(residuals: &[DMatrix<f64>]) -> Result<DMatrix<f64>, BayesError> {
    let n = residuals.len();
    if n < 2 {
        return Err(BayesError::Config("cross-unit correlation needs at least two countries".into()));
    }
    let (t, kv) = residuals[0].shape();
    if residuals.iter().any(|r| r.shape() != (t, kv)) {
        return Err(BayesError::Config("residual blocks differ in shape".into()));
    }
    let col = |c: usize, v: usize| -> Vec<f64> { residuals[c].column(v).iter().copied().collect() };
    Ok(DMatrix::from_fn(n, kv, |i, v| {
        let own = col(i, v);
        (0..n).filter(|&j| j != i).map(|j| linalg::correlation(&own, &col(j, v)).abs()).sum::<f64>() / (n - 1) as f64
    }))
}

/// Bucket counts of the cross-unit correlations, one set per variable.
pub fn cross_unit_buckets(corr: &DMatrix<f64>) -> Vec<CorrBuckets> {
    (0..corr.ncols())
        .map(|v| {
            let mut b = CorrBuckets::default();
            corr.column(v).iter().for_each(|&c| b.add(c));
            b
        })
        .collect()
}

/// Country residuals `y − X b̄` at the posterior-mean coefficients, rows
/// `1..T` of the sample.
pub fn posterior_mean_residuals(
    panel: &Panel,
    weights: &WeightMatrix,
    draws: &PosteriorDraws,
) -> Result<Vec<DMatrix<f64>>, BayesError> {
    let mean = draws.posterior_mean();
    draws
        .layout
        .countries
        .iter()
        .enumerate()
        .map(|(i, country)| {
            let c = panel
                .country_index(country)
                .map_err(|_| BayesError::Config(format!("country '{country}' is not in the panel")))?;
            let star = build_star(panel, weights, country)?;
            let (x, y) = varx_design(&panel.country_block(c), &star, draws.deterministic);
            Ok(y - x * mean[i].coef_matrix(draws.deterministic))
        })
        .collect()
}
