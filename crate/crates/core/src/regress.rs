//! Ordinary least squares and rolling-window regression.

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use thiserror::Error;

use crate::linalg::{self, LinalgError};

/// Smallest rolling window accepted by [`rolling_ols`].
pub const MIN_WINDOW: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("perfect multicollinearity: regressor '{label}' is a linear combination of earlier columns")]
    Multicollinear { column: usize, label: String },
    #[error("{n} observations are too few for {required} parameters")]
    InsufficientData { n: usize, required: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Result of a single least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub intercept: Option<f64>,
    pub slopes: Vec<f64>,
    /// Standard errors in the order `[intercept?, slopes…]`.
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    /// `NaN` when the fit has no residual degrees of freedom.
    pub f_pvalue: f64,
    pub n: usize,
    pub df_resid: usize,
}

impl OlsFit {
    /// Coefficients in the order `[intercept?, slopes…]`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.intercept.iter().copied().chain(self.slopes.iter().copied()).collect()
    }
}

fn design(x: &DMatrix<f64>, intercept: bool) -> DMatrix<f64> {
    if !intercept {
        return x.clone();
    }
    let (n, p) = x.shape();
    let mut d = DMatrix::from_element(n, p + 1, 1.0);
    d.view_mut((0, 1), (n, p)).copy_from(x);
    d
}

/// Least squares of `y` on the columns of `x` (plus an optional intercept),
/// via a Householder QR decomposition of the design.
pub fn ols_fit(x: &DMatrix<f64>, y: &[f64], intercept: bool) -> Result<OlsFit, RegressError> {
    let n = y.len();
    if x.nrows() != n {
        return Err(RegressError::Dimension(format!("X has {} rows, y has {n} observations", x.nrows())));
    }
    let p = x.ncols();
    let n_params = p + usize::from(intercept);
    if n < n_params || n_params == 0 {
        return Err(RegressError::InsufficientData { n, required: n_params.max(1) });
    }
    let d = design(x, intercept);
    let yv = DMatrix::from_column_slice(n, 1, y);
    let ls = linalg::least_squares(&d, &yv).map_err(|e| match e {
        LinalgError::RankDeficient { column } => {
            let label = match (intercept, column) {
                (true, 0) => "intercept".to_string(),
                (true, c) => format!("x{}", c - 1),
                (false, c) => format!("x{c}"),
            };
            RegressError::Multicollinear { column, label }
        }
        other => RegressError::Dimension(other.to_string()),
    })?;
    let coef: Vec<f64> = ls.coef.column(0).iter().copied().collect();
    let residuals: Vec<f64> = ls.residuals.column(0).iter().copied().collect();
    let fitted: Vec<f64> = y.iter().zip(&residuals).map(|(a, e)| a - e).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let tss: f64 = if intercept {
        let m = linalg::mean(y);
        y.iter().map(|v| (v - m) * (v - m)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let df_resid = n - n_params;
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };
    let adj_r_squared = if df_resid > 0 {
        let n_c = (n - usize::from(intercept)) as f64;
        1.0 - (1.0 - r_squared) * n_c / df_resid as f64
    } else {
        r_squared
    };
    let (f_stat, f_pvalue) = if df_resid == 0 || p == 0 {
        (f64::NAN, f64::NAN)
    } else if tss == 0.0 {
        (0.0, 1.0)
    } else if r_squared >= 1.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (r_squared / p as f64) / ((1.0 - r_squared) / df_resid as f64);
        let dist = FisherSnedecor::new(p as f64, df_resid as f64).map_err(|e| RegressError::Config(e.to_string()))?;
        (f, dist.sf(f))
    };
    let sigma2 = if df_resid > 0 { rss / df_resid as f64 } else { 0.0 };
    let std_errors = (0..n_params).map(|i| (sigma2 * ls.xtx_inv[(i, i)]).sqrt()).collect();
    let (b0, slopes) = if intercept { (Some(coef[0]), coef[1..].to_vec()) } else { (None, coef) };
    Ok(OlsFit {
        intercept: b0,
        slopes,
        std_errors,
        residuals,
        fitted,
        rss,
        r_squared,
        adj_r_squared,
        f_stat,
        f_pvalue,
        n,
        df_resid,
    })
}

/// Single-regressor convenience wrapper with an intercept.
pub fn ols_simple(x: &[f64], y: &[f64]) -> Result<OlsFit, RegressError> {
    ols_fit(&DMatrix::from_column_slice(x.len(), 1, x), y, true)
}

/// Fits of `y` on `x` over every contiguous window.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingResult {
    pub window: usize,
    /// Fits ordered by window start index.
    pub fits: Vec<OlsFit>,
    pub mean_adj_r_squared: f64,
    /// F-test p-value of the same regression on the full sample.
    pub pooled_f_pvalue: f64,
}

impl RollingResult {
    pub fn slopes(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.slopes[0]).collect()
    }
}

/// Slide a fixed window one step at a time over the full sample.
pub fn rolling_ols(x: &[f64], y: &[f64], window: usize) -> Result<RollingResult, RegressError> {
    if x.len() != y.len() {
        return Err(RegressError::Dimension(format!("x has {} observations, y has {}", x.len(), y.len())));
    }
    let n = x.len();
    if window < MIN_WINDOW {
        return Err(RegressError::Config(format!("rolling window {window} is below the minimum of {MIN_WINDOW}")));
    }
    if window > n {
        return Err(RegressError::Config(format!("rolling window {window} exceeds the {n} available observations")));
    }
    let fits =
        (0..=n - window).map(|s| ols_simple(&x[s..s + window], &y[s..s + window])).collect::<Result<Vec<_>, _>>()?;
    let mean_adj_r_squared = fits.iter().map(|f| f.adj_r_squared).sum::<f64>() / fits.len() as f64;
    let pooled_f_pvalue = ols_simple(x, y)?.f_pvalue;
    Ok(RollingResult { window, fits, mean_adj_r_squared, pooled_f_pvalue })
}
