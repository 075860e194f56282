//! Generalized impulse responses: the response of the global vector `h`
//! periods after a one-standard-deviation shock to variable `j`, integrating
//! out the other shocks with their historical correlation,
//! `F^h Σ_e s_j / √σ_jj`.

use bgvar_core::gvar::SolvedGlobal;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::BayesError;

/// Responses for horizons `0..=horizons` as a `(horizons + 1) × k` matrix.
pub fn girf(model: &SolvedGlobal, shock: usize, horizons: usize) -> Result<DMatrix<f64>, BayesError> {
    let k = model.dim();
    if shock >= k {
        return Err(BayesError::Config(format!("shock index {shock} is outside the {k} global variables")));
    }
    let s_jj = model.sigma_e[(shock, shock)];
    if !(s_jj > 0.0) {
        return Err(BayesError::Degenerate(format!("shocked variable {shock} has zero reduced-form variance")));
    }
    let mut impact = model.sigma_e.column(shock).into_owned() / s_jj.sqrt();
    let mut out = DMatrix::zeros(horizons + 1, k);
    for h in 0..=horizons {
        out.row_mut(h).copy_from(&impact.transpose());
        impact = &model.f * impact;
    }
    Ok(out)
}

/// Responses for every draw, in draw order.
pub fn girf_draws(draws: &[&SolvedGlobal], shock: usize, horizons: usize) -> Result<Vec<DMatrix<f64>>, BayesError> {
    if draws.is_empty() {
        return Err(BayesError::Analysis("no draws to compute impulse responses from".into()));
    }
    draws.par_iter().map(|m| girf(m, shock, horizons)).collect()
}
