//! Posterior sampling of every country model and assembly of each retained
//! draw into a solved global system.

use bgvar_core::gvar::{
    build_link, build_star, stack_global, varx_design, CountryModel, GlobalLayout, GvarError, LinkMatrix, SolvedGlobal,
    StackOptions,
};
use bgvar_core::linalg;
use bgvar_core::panel::Panel;
use bgvar_core::weights::WeightMatrix;
use bgvar_core::Deterministic;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::ng::{sample_regression, CoefPrior, NgPrior, RegressionChain, Schedule};
use crate::rng::substream;
use crate::BayesError;

/// Coefficient groups sharing one global shrinkage parameter.
pub const GROUP_OWN_LAG: usize = 0;
pub const GROUP_FOREIGN: usize = 1;
pub const GROUP_FOREIGN_LAG: usize = 2;

/// One posterior draw of a country VARX\*(1,1).
#[derive(Debug, Clone, PartialEq)]
pub struct CountryDraw {
    pub a0: DVector<f64>,
    pub a1: DVector<f64>,
    pub psi: DMatrix<f64>,
    pub lambda0: DMatrix<f64>,
    pub lambda1: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

impl CountryDraw {
    fn from_coef(coef: &DMatrix<f64>, sigma: DMatrix<f64>, det: Deterministic) -> Self {
        let m = det.n_terms();
        let k = coef.ncols();
        let ks = (coef.nrows() - m - k) / 2;
        CountryDraw {
            a0: if m >= 1 { coef.row(0).transpose() } else { DVector::zeros(k) },
            a1: if m == 2 { coef.row(1).transpose() } else { DVector::zeros(k) },
            psi: coef.rows(m, k).transpose(),
            lambda0: coef.rows(m + k, ks).transpose(),
            lambda1: coef.rows(m + k + ks, ks).transpose(),
            sigma,
        }
    }

    /// Coefficients in design order (`m × k`), the inverse of the layout
    /// used by the sampler.
    pub fn coef_matrix(&self, det: Deterministic) -> DMatrix<f64> {
        let m = det.n_terms();
        let (k, ks) = (self.psi.nrows(), self.lambda0.ncols());
        let mut c = DMatrix::zeros(m + k + 2 * ks, k);
        if m >= 1 {
            c.row_mut(0).copy_from(&self.a0.transpose());
        }
        if m == 2 {
            c.row_mut(1).copy_from(&self.a1.transpose());
        }
        c.rows_mut(m, k).copy_from(&self.psi.transpose());
        c.rows_mut(m + k, ks).copy_from(&self.lambda0.transpose());
        c.rows_mut(m + k + ks, ks).copy_from(&self.lambda1.transpose());
        c
    }

    pub fn to_model(&self, country: &str, det: Deterministic) -> CountryModel {
        let k = self.psi.nrows();
        CountryModel {
            country: country.to_string(),
            deterministic: det,
            a0: self.a0.clone(),
            a1: self.a1.clone(),
            psi: self.psi.clone(),
            lambda0: self.lambda0.clone(),
            lambda1: self.lambda1.clone(),
            sigma: self.sigma.clone(),
            residuals: DMatrix::zeros(0, k),
            std_errors: DMatrix::zeros(0, k),
        }
    }
}

/// Country draws of one iteration and the global system they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDraw {
    pub countries: Vec<CountryDraw>,
    pub solved: SolvedGlobal,
    pub spectral_radius: f64,
}

impl GlobalDraw {
    /// Strict stability: spectral radius of `F` below one.
    pub fn is_stable(&self) -> bool {
        self.spectral_radius < 1.0
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub layout: GlobalLayout,
    pub deterministic: Deterministic,
    pub links: Vec<LinkMatrix>,
    pub seed: u64,
    pub n_burn: usize,
    pub thin: usize,
    /// Hash of the run configuration that produced the draws; empty when
    /// sampled outside a configured run.
    pub config_hash: String,
    pub draws: Vec<GlobalDraw>,
}

impl PosteriorDraws {
    pub fn n_stable(&self) -> usize {
        self.draws.iter().filter(|d| d.is_stable()).count()
    }

    /// Sample mean of the country coefficients and covariances.
    pub fn posterior_mean(&self) -> Vec<CountryDraw> {
        let n = self.draws.len() as f64;
        let mut mean = self.draws[0].countries.clone();
        for d in &self.draws[1..] {
            for (acc, c) in mean.iter_mut().zip(&d.countries) {
                acc.a0 += &c.a0;
                acc.a1 += &c.a1;
                acc.psi += &c.psi;
                acc.lambda0 += &c.lambda0;
                acc.lambda1 += &c.lambda1;
                acc.sigma += &c.sigma;
            }
        }
        for acc in &mut mean {
            acc.a0 /= n;
            acc.a1 /= n;
            acc.psi /= n;
            acc.lambda0 /= n;
            acc.lambda1 /= n;
            acc.sigma /= n;
        }
        mean
    }
}

/// Draws whose global system is stable. Fails when none are.
pub fn filter_stable(draws: &PosteriorDraws) -> Result<Vec<&GlobalDraw>, BayesError> {
    let stable: Vec<&GlobalDraw> = draws.draws.iter().filter(|d| d.is_stable()).collect();
    if stable.is_empty() {
        return Err(BayesError::Analysis(format!(
            "none of the {} posterior draws is stable; the posterior sits on explosive dynamics, so forecasts and impulse responses are not produced",
            draws.draws.len()
        )));
    }
    Ok(stable)
}

/// Prior scale for the residual covariance: residual variances of
/// univariate AR(1) regressions with an intercept.
fn ar1_scale(country: &str, block: &DMatrix<f64>, variables: &[String]) -> Result<DVector<f64>, BayesError> {
    let t = block.nrows();
    let mut out = DVector::zeros(block.ncols());
    for v in 0..block.ncols() {
        let x = DMatrix::from_fn(t - 1, 2, |r, c| if c == 0 { 1.0 } else { block[(r, v)] });
        let y = DMatrix::from_fn(t - 1, 1, |r, _| block[(r + 1, v)]);
        let s2 = match linalg::least_squares(&x, &y) {
            Ok(ls) => ls.residuals.norm_squared() / (t - 3) as f64,
            Err(_) => 0.0,
        };
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(BayesError::Degenerate(format!(
                "{country}: '{}' has zero residual variance in a univariate AR(1)",
                variables[v]
            )));
        }
        out[v] = s2;
    }
    Ok(out)
}

/// Regressor priors in VARX\*(1,1) design order.
pub fn design_priors(det: Deterministic, k: usize, ks: usize, prior: &NgPrior) -> Vec<CoefPrior> {
    let mut rows = vec![CoefPrior::Fixed(prior.deterministic_variance); det.n_terms()];
    rows.extend(std::iter::repeat_n(CoefPrior::Shrunk(GROUP_OWN_LAG), k));
    rows.extend(std::iter::repeat_n(CoefPrior::Shrunk(GROUP_FOREIGN), ks));
    rows.extend(std::iter::repeat_n(CoefPrior::Shrunk(GROUP_FOREIGN_LAG), ks));
    rows
}

/// Run one chain per country and solve the global system for every retained
/// draw. Countries are sampled in parallel, each from its own named random
/// stream, so the output depends only on the inputs and `seed`.
pub fn sample_posterior(
    panel: &Panel,
    weights: &WeightMatrix,
    det: Deterministic,
    prior: &NgPrior,
    schedule: &Schedule,
    seed: u64,
    opts: &StackOptions,
) -> Result<PosteriorDraws, BayesError> {
    prior.validate()?;
    schedule.validate()?;
    let layout = GlobalLayout::from_panel(panel);
    if weights.countries() != layout.countries.as_slice() {
        return Err(BayesError::Config("weight matrix countries must match the panel countries in order".into()));
    }
    let kv = layout.n_variables();
    let m = det.n_terms();
    let t = panel.n_periods();
    let required = m + 3 * kv + 2;
    if t < required {
        return Err(GvarError::InsufficientData { country: layout.countries[0].clone(), n: t, required }.into());
    }
    if (0..layout.n_countries()).any(|c| panel.country_block(c).iter().any(|v| !v.is_finite())) {
        return Err(BayesError::Config("panel contains non-finite values".into()));
    }
    let links = layout.countries.iter().map(|c| build_link(&layout, c, weights)).collect::<Result<Vec<_>, _>>()?;

    let chains: Vec<RegressionChain> = layout
        .countries
        .par_iter()
        .enumerate()
        .map(|(i, country)| -> Result<RegressionChain, BayesError> {
            let block = panel.country_block(i);
            let star = build_star(panel, weights, country)?;
            let (x, y) = varx_design(&block, &star, det);
            let scale = ar1_scale(country, &block, &layout.variables)?;
            let rows = design_priors(det, kv, kv, prior);
            let mut rng = substream(seed, &format!("bgvar/country/{country}"));
            sample_regression(&x, &y, &rows, &scale, prior, schedule, &mut rng).map_err(|e| match e {
                BayesError::Sampler { draw, message, .. } => {
                    BayesError::Sampler { draw, country: Some(country.clone()), message }
                }
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;

    let draws: Vec<GlobalDraw> = (0..schedule.n_draws)
        .into_par_iter()
        .map(|d| {
            let countries: Vec<CountryDraw> =
                chains.iter().map(|ch| CountryDraw::from_coef(&ch.coefs[d], ch.sigmas[d].clone(), det)).collect();
            assemble(&layout, det, &links, countries, opts).map_err(|e| BayesError::Sampler {
                draw: schedule.n_burn + (d + 1) * schedule.thin - 1,
                country: None,
                message: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(PosteriorDraws {
        layout,
        deterministic: det,
        links,
        seed,
        n_burn: schedule.n_burn,
        thin: schedule.thin,
        config_hash: String::new(),
        draws,
    })
}

/// Stack country draws into a solved global system.
pub fn assemble(
    layout: &GlobalLayout,
    det: Deterministic,
    links: &[LinkMatrix],
    countries: Vec<CountryDraw>,
    opts: &StackOptions,
) -> Result<GlobalDraw, GvarError> {
    let models: Vec<CountryModel> =
        countries.iter().zip(&layout.countries).map(|(c, name)| c.to_model(name, det)).collect();
    let global = stack_global(layout, &models, links, opts)?;
    let spectral_radius = linalg::spectral_radius(&global.solved.f);
    Ok(GlobalDraw { countries, solved: global.solved, spectral_radius })
}
