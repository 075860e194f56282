//! Unconditional and conditional forecasts from posterior draws of the
//! global system.
//!
//! Conditional forecasts hold chosen variables at given values by drawing
//! the stacked future shocks from their Gaussian distribution conditional
//! on the linear constraints they must satisfy.

use bgvar_core::gvar::SolvedGlobal;
use bgvar_core::linalg;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::quantile::pointwise_quantiles;
use crate::rng::indexed_substream;
use crate::BayesError;

/// Largest accepted condition number of the constraint covariance.
const CONSTRAINT_CONDITION_CEILING: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockMode {
    /// Gaussian shocks with the draw's reduced-form covariance.
    Simulated,
    /// All future shocks set to zero.
    Zero,
}

/// Hold global variable `index` at `value` in forecast period `horizon`
/// (counted from 1). With a positive `half_width` each draw instead uses a
/// value drawn uniformly from `value ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub index: usize,
    pub horizon: usize,
    pub value: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastPaths {
    /// One `n_ahead × k` path per draw.
    pub paths: Vec<DMatrix<f64>>,
}

impl ForecastPaths {
    pub fn quantiles(&self, levels: &[f64]) -> Vec<DMatrix<f64>> {
        pointwise_quantiles(&self.paths, levels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSpec {
    pub n_ahead: usize,
    pub shocks: ShockMode,
    pub constraints: Vec<Constraint>,
    pub seed: u64,
}

fn check_spec(spec: &ForecastSpec, k: usize) -> Result<(), BayesError> {
    if spec.n_ahead == 0 {
        return Err(BayesError::Config("forecast horizon must be at least 1".into()));
    }
    for c in &spec.constraints {
        if c.index >= k {
            return Err(BayesError::Config(format!(
                "constraint index {} is outside the {k} global variables",
                c.index
            )));
        }
        if c.horizon == 0 || c.horizon > spec.n_ahead {
            return Err(BayesError::Config(format!(
                "constraint horizon {} is outside 1..={}",
                c.horizon, spec.n_ahead
            )));
        }
        if !(c.value.is_finite() && c.half_width.is_finite() && c.half_width >= 0.0) {
            return Err(BayesError::Config("constraint values must be finite with a nonnegative half-width".into()));
        }
    }
    Ok(())
}

/// Forecast paths for periods `t_last + 1 … t_last + n_ahead`, one per draw.
/// Draw `d` uses its own random stream, so results do not depend on how
/// the work is scheduled.
pub fn forecast(
    draws: &[&SolvedGlobal],
    x_last: &DVector<f64>,
    t_last: usize,
    spec: &ForecastSpec,
) -> Result<ForecastPaths, BayesError> {
    if draws.is_empty() {
        return Err(BayesError::Analysis("no draws to forecast from".into()));
    }
    let k = x_last.len();
    if draws.iter().any(|d| d.dim() != k) {
        return Err(BayesError::Config("starting vector does not match the model dimension".into()));
    }
    check_spec(spec, k)?;
    let paths = draws
        .par_iter()
        .enumerate()
        .map(|(d, model)| {
            let mut rng = indexed_substream(spec.seed, "forecast", d);
            forecast_one(model, x_last, t_last, spec, &mut rng).map_err(|e| match e {
                BayesError::Numerical(m) => BayesError::Numerical(format!("draw {d}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ForecastPaths { paths })
}

fn forecast_one<R: Rng + ?Sized>(
    model: &SolvedGlobal,
    x_last: &DVector<f64>,
    t_last: usize,
    spec: &ForecastSpec,
    rng: &mut R,
) -> Result<DMatrix<f64>, BayesError> {
    let k = model.dim();
    let h_max = spec.n_ahead;
    let targets: Vec<f64> = spec
        .constraints
        .iter()
        .map(|c| if c.half_width > 0.0 { c.value + c.half_width * (2.0 * rng.random::<f64>() - 1.0) } else { c.value })
        .collect();
    let mut shocks: Vec<DVector<f64>> = match spec.shocks {
        ShockMode::Zero => vec![DVector::zeros(k); h_max],
        ShockMode::Simulated => {
            let l = linalg::psd_factor(&model.sigma_e);
            (0..h_max).map(|_| &l * DVector::from_fn(k, |_, _| StandardNormal.sample(rng))).collect()
        }
    };
    if !spec.constraints.is_empty() {
        condition_shocks(model, x_last, t_last, &spec.constraints, &targets, &mut shocks)?;
    }
    let mut out = DMatrix::zeros(h_max, k);
    let mut x = x_last.clone();
    for h in 1..=h_max {
        x = model.step(&x, (t_last + h) as f64);
        if spec.shocks == ShockMode::Simulated || !spec.constraints.is_empty() {
            x += &shocks[h - 1];
        }
        for (c, &v) in spec.constraints.iter().zip(&targets) {
            if c.horizon == h {
                x[c.index] = v;
            }
        }
        out.row_mut(h - 1).copy_from(&x.transpose());
    }
    Ok(out)
}

/// Replace `shocks` by a draw from their distribution given that the path
/// they generate meets every constraint: `E ← E + Ω Rᵀ (R Ω Rᵀ)⁻¹ (r − R E)`,
/// where `R E` is the constrained part of the path net of its zero-shock
/// value.
fn condition_shocks(
    model: &SolvedGlobal,
    x_last: &DVector<f64>,
    t_last: usize,
    constraints: &[Constraint],
    targets: &[f64],
    shocks: &mut [DVector<f64>],
) -> Result<(), BayesError> {
    let k = model.dim();
    let h_max = shocks.len();
    let n_c = constraints.len();
    let mean_path = model.iterate(x_last, t_last, h_max);
    let mut powers = vec![DMatrix::identity(k, k)];
    for _ in 1..h_max {
        let next = &model.f * powers.last().unwrap();
        powers.push(next);
    }
    // Column c of Ω Rᵀ, stored per horizon: Σ_e (F^{h_c − s})ᵀ_{·, i_c}.
    let omega_rt: Vec<Vec<DVector<f64>>> = constraints
        .iter()
        .map(|c| {
            (1..=h_max)
                .map(|s| {
                    if s <= c.horizon {
                        &model.sigma_e * powers[c.horizon - s].row(c.index).transpose()
                    } else {
                        DVector::zeros(k)
                    }
                })
                .collect()
        })
        .collect();
    // R applied to a stacked shock vector.
    let apply_r = |c: &Constraint, e: &dyn Fn(usize) -> DVector<f64>| -> f64 {
        (1..=c.horizon).map(|s| powers[c.horizon - s].row(c.index).dot(&e(s - 1).transpose())).sum()
    };
    let mut s_mat = DMatrix::zeros(n_c, n_c);
    for (a, ca) in constraints.iter().enumerate() {
        for b in 0..n_c {
            s_mat[(a, b)] = apply_r(ca, &|s| omega_rt[b][s].clone());
        }
    }
    let s_mat = linalg::symmetrize(&s_mat);
    if !(linalg::condition_number(&s_mat) <= CONSTRAINT_CONDITION_CEILING) {
        return Err(BayesError::Numerical(
            "conditioning constraints are singular; they are redundant or target variables that receive no shocks"
                .into(),
        ));
    }
    let gap = DVector::from_fn(n_c, |a, _| {
        let c = &constraints[a];
        targets[a] - mean_path[c.horizon - 1][c.index] - apply_r(c, &|s| shocks[s].clone())
    });
    let weights =
        s_mat.lu().solve(&gap).ok_or_else(|| BayesError::Numerical("conditioning constraints are singular".into()))?;
    for (s, e) in shocks.iter_mut().enumerate() {
        for c in 0..n_c {
            e.axpy(weights[c], &omega_rt[c][s], 1.0);
        }
    }
    Ok(())
}
