//! Reduced-form VAR(p) estimation for a single block of series.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::Deterministic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarError {
    #[error("collinear design: regressor '{label}' (column {column}) is a linear combination of earlier columns")]
    Collinear { column: usize, label: String },
    #[error("{n} observations are too few; at least {required} are needed")]
    InsufficientData { n: usize, required: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InfoCriterion {
    Aic,
    #[default]
    Bic,
}

/// Least-squares fit of a design against several responses, with the
/// rank-deficiency error rewritten to name the offending regressor.
pub(crate) struct DesignFit {
    pub coef: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    pub xtx_inv: DMatrix<f64>,
}

pub(crate) fn fit_design(x: &DMatrix<f64>, y: &DMatrix<f64>, labels: &[String]) -> Result<DesignFit, VarError> {
    match linalg::least_squares(x, y) {
        Ok(ls) => Ok(DesignFit { coef: ls.coef, residuals: ls.residuals, xtx_inv: ls.xtx_inv }),
        Err(LinalgError::RankDeficient { column }) => Err(VarError::Collinear {
            column,
            label: labels.get(column).cloned().unwrap_or_else(|| format!("#{column}")),
        }),
        Err(e) => Err(VarError::Numerical(e.to_string())),
    }
}

/// Residual covariance `U'U / df`.
pub(crate) fn residual_covariance(u: &DMatrix<f64>, df: usize) -> DMatrix<f64> {
    linalg::symmetrize(&(u.transpose() * u / df as f64))
}

/// Coefficient standard errors laid out like the coefficient matrix.
pub(crate) fn coef_std_errors(xtx_inv: &DMatrix<f64>, sigma: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(xtx_inv.nrows(), sigma.nrows(), |r, j| (xtx_inv[(r, r)] * sigma[(j, j)]).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarEstimate {
    pub lag: usize,
    pub deterministic: Deterministic,
    /// Intercepts (zero when the model has no constant).
    pub alpha: DVector<f64>,
    /// Trend coefficients, present under [`Deterministic::ConstantTrend`].
    pub trend: Option<DVector<f64>>,
    /// Lag matrices `φ_1 … φ_p`, each `k × k`.
    pub phi: Vec<DMatrix<f64>>,
    /// `nobs × k` residuals for rows `lag..T` of the input block.
    pub residuals: DMatrix<f64>,
    pub fitted: DMatrix<f64>,
    /// Residual covariance with `T − (k·p + m)` degrees of freedom.
    pub sigma: DMatrix<f64>,
    /// Standard errors in design order: `[const?, trend?, lag 1 block, …]`.
    pub std_errors: DMatrix<f64>,
    pub nobs: usize,
}

impl VarEstimate {
    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// Standard error of `φ_l[(i, j)]` (`l` counted from 1).
    pub fn phi_std_error(&self, l: usize, i: usize, j: usize) -> f64 {
        let m = self.deterministic.n_terms();
        self.std_errors[(m + (l - 1) * self.k() + j, i)]
    }

    pub fn companion(&self) -> DMatrix<f64> {
        linalg::companion(&self.phi)
    }
}

/// Regressor labels in design order.
pub fn design_labels(k: usize, p: usize, det: Deterministic) -> Vec<String> {
    let mut labels = Vec::with_capacity(det.n_terms() + k * p);
    if det.n_terms() >= 1 {
        labels.push("const".to_string());
    }
    if det.n_terms() == 2 {
        labels.push("trend".to_string());
    }
    for l in 1..=p {
        for j in 0..k {
            labels.push(format!("y{}.l{}", j + 1, l));
        }
    }
    labels
}

fn design(block: &DMatrix<f64>, p: usize, det: Deterministic, start: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = block.ncols();
    let m = det.n_terms();
    let n = block.nrows() - start;
    let x = DMatrix::from_fn(n, m + k * p, |r, c| {
        let t = r + start;
        if c < m {
            if c == 0 {
                1.0
            } else {
                t as f64
            }
        } else {
            let (l, j) = ((c - m) / k + 1, (c - m) % k);
            block[(t - l, j)]
        }
    });
    let y = block.rows(start, n).into_owned();
    (x, y)
}

fn check_block(block: &DMatrix<f64>, p: usize, det: Deterministic) -> Result<(), VarError> {
    let (t, k) = block.shape();
    if k == 0 {
        return Err(VarError::Config("block has no variables".into()));
    }
    if p == 0 {
        return Err(VarError::Config("lag order must be at least 1".into()));
    }
    if block.iter().any(|v| !v.is_finite()) {
        return Err(VarError::Config("block contains non-finite values".into()));
    }
    let required = k * p + det.n_terms() + 11;
    if t < required {
        return Err(VarError::InsufficientData { n: t, required });
    }
    Ok(())
}

/// Equation-by-equation least squares of a VAR(p) on the rows of `block`
/// (`T × k`). The trend regressor is the row index of the block.
pub fn estimate_var(block: &DMatrix<f64>, p: usize, det: Deterministic) -> Result<VarEstimate, VarError> {
    check_block(block, p, det)?;
    let k = block.ncols();
    let m = det.n_terms();
    let (x, y) = design(block, p, det, p);
    let labels = design_labels(k, p, det);
    let fit = fit_design(&x, &y, &labels)?;
    let nobs = x.nrows();
    let sigma = residual_covariance(&fit.residuals, nobs - x.ncols());
    let std_errors = coef_std_errors(&fit.xtx_inv, &sigma);
    let alpha = if m >= 1 { fit.coef.row(0).transpose() } else { DVector::zeros(k) };
    let trend = (m == 2).then(|| fit.coef.row(1).transpose());
    let phi = (0..p).map(|l| fit.coef.rows(m + l * k, k).transpose()).collect();
    let fitted = &y - &fit.residuals;
    Ok(VarEstimate {
        lag: p,
        deterministic: det,
        alpha,
        trend,
        phi,
        residuals: fit.residuals,
        fitted,
        sigma,
        std_errors,
        nobs,
    })
}

/// Lag order in `1..=p_max` minimising the information criterion, with every
/// candidate fitted on the same sample (rows `p_max..T`).
pub fn select_lag(
    block: &DMatrix<f64>,
    p_max: usize,
    det: Deterministic,
    criterion: InfoCriterion,
) -> Result<usize, VarError> {
    if p_max == 0 {
        return Err(VarError::Config("maximum lag must be at least 1".into()));
    }
    check_block(block, p_max, det)?;
    if p_max == 1 {
        return Ok(1);
    }
    let k = block.ncols();
    let mut best = (f64::INFINITY, 1);
    for p in 1..=p_max {
        let (x, y) = design(block, p, det, p_max);
        let fit = fit_design(&x, &y, &design_labels(k, p, det))?;
        let n = x.nrows() as f64;
        let sigma_ml = fit.residuals.transpose() * &fit.residuals / n;
        let det_sigma = sigma_ml.determinant();
        if det_sigma <= 0.0 {
            return Err(VarError::Numerical(format!("singular residual covariance at lag {p}")));
        }
        let n_params = (k * x.ncols()) as f64;
        let penalty = match criterion {
            InfoCriterion::Aic => 2.0,
            InfoCriterion::Bic => n.ln(),
        };
        let ic = det_sigma.ln() + penalty * n_params / n;
        if ic < best.0 {
            best = (ic, p);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRms {
    pub per_equation: Vec<f64>,
    pub pooled: f64,
}

/// Root mean squared residual over the usable observations.
pub fn residual_rms(est: &VarEstimate) -> ResidualRms {
    let u = &est.residuals;
    let n = u.nrows() as f64;
    let per_equation = u.column_iter().map(|c| (c.norm_squared() / n).sqrt()).collect();
    let pooled = (u.norm_squared() / (n * u.ncols() as f64)).sqrt();
    ResidualRms { per_equation, pooled }
}

/// Companion-matrix eigenvalue moduli, descending.
pub fn var_stability(est: &VarEstimate) -> Vec<f64> {
    linalg::eigen_moduli(&est.companion())
}

/// Strict stability: all companion eigenvalues inside the unit circle.
pub fn is_stable(moduli: &[f64]) -> bool {
    moduli.first().is_none_or(|&m| m < 1.0)
}
