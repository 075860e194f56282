use nalgebra::{DMatrix, DVector};

use super::GvarError;
use crate::var::{coef_std_errors, fit_design, residual_covariance};
use crate::Deterministic;

/// Estimated country VARX\*(1,1):
/// `x_t = a0 + a1·t + Ψ x_{t−1} + Λ0 x*_t + Λ1 x*_{t−1} + ε_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryModel {
    pub country: String,
    pub deterministic: Deterministic,
    pub a0: DVector<f64>,
    pub a1: DVector<f64>,
    /// `k_i × k_i`.
    pub psi: DMatrix<f64>,
    /// `k_i × k_i*`.
    pub lambda0: DMatrix<f64>,
    /// `k_i × k_i*`.
    pub lambda1: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    /// Residuals for sample rows `1..T`.
    pub residuals: DMatrix<f64>,
    /// Standard errors in [`varx_labels`] order, one column per equation.
    pub std_errors: DMatrix<f64>,
}

impl CountryModel {
    pub fn k(&self) -> usize {
        self.psi.nrows()
    }

    pub fn k_star(&self) -> usize {
        self.lambda0.ncols()
    }

    /// `A_i = [I, −Λ0]`.
    pub fn a_matrix(&self) -> DMatrix<f64> {
        let (k, ks) = (self.k(), self.k_star());
        let mut a = DMatrix::zeros(k, k + ks);
        a.view_mut((0, 0), (k, k)).fill_with_identity();
        a.view_mut((0, k), (k, ks)).copy_from(&(-&self.lambda0));
        a
    }

    /// `B_i = [Ψ, Λ1]`.
    pub fn b_matrix(&self) -> DMatrix<f64> {
        let (k, ks) = (self.k(), self.k_star());
        let mut b = DMatrix::zeros(k, k + ks);
        b.view_mut((0, 0), (k, k)).copy_from(&self.psi);
        b.view_mut((0, k), (k, ks)).copy_from(&self.lambda1);
        b
    }

    fn check_dims(&self) -> Result<(), GvarError> {
        let (k, ks) = (self.k(), self.k_star());
        let ok = self.psi.ncols() == k
            && self.lambda0.nrows() == k
            && self.lambda1.shape() == (k, ks)
            && self.a0.len() == k
            && self.a1.len() == k
            && self.sigma.shape() == (k, k);
        if ok {
            Ok(())
        } else {
            Err(GvarError::Config(format!("{}: inconsistent coefficient dimensions", self.country)))
        }
    }

    pub(crate) fn validate(&self) -> Result<(), GvarError> {
        self.check_dims()
    }
}

/// Regressor labels of the VARX\*(1,1) design.
pub fn varx_labels(own: &[String], star: &[String], det: Deterministic) -> Vec<String> {
    let mut labels = Vec::new();
    if det.n_terms() >= 1 {
        labels.push("const".to_string());
    }
    if det.n_terms() == 2 {
        labels.push("trend".to_string());
    }
    labels.extend(own.iter().map(|v| format!("{v}.l1")));
    labels.extend(star.iter().map(|v| format!("{v}*")));
    labels.extend(star.iter().map(|v| format!("{v}*.l1")));
    labels
}

/// Design matrix and responses of the VARX*(1,1) over rows `1..T`.
pub fn varx_design(x: &DMatrix<f64>, star: &DMatrix<f64>, det: Deterministic) -> (DMatrix<f64>, DMatrix<f64>) {
    let (t, k) = x.shape();
    let ks = star.ncols();
    let m = det.n_terms();
    let design = DMatrix::from_fn(t - 1, m + k + 2 * ks, |r, c| {
        let s = r + 1;
        if c < m {
            return if c == 0 { 1.0 } else { s as f64 };
        }
        let c = c - m;
        if c < k {
            x[(s - 1, c)]
        } else if c < k + ks {
            star[(s, c - k)]
        } else {
            star[(s - 1, c - k - ks)]
        }
    });
    (design, x.rows(1, t - 1).into_owned())
}

/// Least-squares VARX\*(1,1) for one country. `x` is `T × k_i`, `star` is
/// `T × k_i*`; the trend regressor is the sample row index.
pub fn estimate_varx(
    country: &str,
    own_names: &[String],
    star_names: &[String],
    x: &DMatrix<f64>,
    star: &DMatrix<f64>,
    det: Deterministic,
) -> Result<CountryModel, GvarError> {
    let (t, k) = x.shape();
    let ks = star.ncols();
    if star.nrows() != t {
        return Err(GvarError::Config(format!(
            "{country}: domestic block has {t} rows but foreign block has {}",
            star.nrows()
        )));
    }
    if own_names.len() != k || star_names.len() != ks {
        return Err(GvarError::Config(format!("{country}: variable names do not match the data blocks")));
    }
    if k == 0 {
        return Err(GvarError::Config(format!("{country}: no domestic variables")));
    }
    if x.iter().chain(star.iter()).any(|v| !v.is_finite()) {
        return Err(GvarError::Config(format!("{country}: non-finite data")));
    }
    let m = det.n_terms();
    let n_coef = m + k + 2 * ks;
    let required = n_coef + 11;
    if t < required {
        return Err(GvarError::InsufficientData { country: country.to_string(), n: t, required });
    }
    let (design, y) = varx_design(x, star, det);
    let labels = varx_labels(own_names, star_names, det);
    let fit = fit_design(&design, &y, &labels).map_err(|e| GvarError::from_var(country, e))?;
    let sigma = residual_covariance(&fit.residuals, design.nrows() - n_coef);
    let std_errors = coef_std_errors(&fit.xtx_inv, &sigma);
    let coef = &fit.coef;
    let a0 = if m >= 1 { coef.row(0).transpose() } else { DVector::zeros(k) };
    let a1 = if m == 2 { coef.row(1).transpose() } else { DVector::zeros(k) };
    let psi = coef.rows(m, k).transpose();
    let lambda0 = coef.rows(m + k, ks).transpose();
    let lambda1 = coef.rows(m + k + ks, ks).transpose();
    Ok(CountryModel {
        country: country.to_string(),
        deterministic: det,
        a0,
        a1,
        psi,
        lambda0,
        lambda1,
        sigma,
        residuals: fit.residuals,
        std_errors,
    })
}
