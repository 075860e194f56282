use nalgebra::{DMatrix, DVector};

use super::link::build_link;
use super::star::{build_star, weight_columns};
use super::varx::{estimate_varx, CountryModel};
use super::{GlobalLayout, GvarError, LinkMatrix};
use crate::linalg;
use crate::panel::Panel;
use crate::weights::WeightMatrix;
use crate::Deterministic;

/// Largest accepted 2-norm condition number of `G`.
pub const DEFAULT_CONDITION_CEILING: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackOptions {
    pub condition_ceiling: f64,
}

impl Default for StackOptions {
    fn default() -> Self {
        StackOptions { condition_ceiling: DEFAULT_CONDITION_CEILING }
    }
}

/// Reduced form `x_t = b0 + b1·t + F x_{t−1} + e_t`, `e_t ~ (0, Σ_e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedGlobal {
    pub b0: DVector<f64>,
    pub b1: DVector<f64>,
    pub f: DMatrix<f64>,
    pub sigma_e: DMatrix<f64>,
}

impl SolvedGlobal {
    pub fn dim(&self) -> usize {
        self.b0.len()
    }

    /// Conditional mean of `x_t` given `x_{t−1}`.
    pub fn step(&self, x_prev: &DVector<f64>, t: f64) -> DVector<f64> {
        &self.b0 + &self.b1 * t + &self.f * x_prev
    }

    /// Zero-shock path for periods `t_last + 1 … t_last + n_ahead`.
    pub fn iterate(&self, x_last: &DVector<f64>, t_last: usize, n_ahead: usize) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(n_ahead);
        let mut x = x_last.clone();
        for h in 1..=n_ahead {
            x = self.step(&x, (t_last + h) as f64);
            out.push(x.clone());
        }
        out
    }

    pub fn eigen_moduli(&self) -> Vec<f64> {
        linalg::eigen_moduli(&self.f)
    }

    /// Spectral radius of `F` strictly below one.
    pub fn is_stable(&self) -> bool {
        linalg::spectral_radius(&self.f) < 1.0
    }
}

/// Structural form `G x_t = a0 + a1·t + H x_{t−1} + ε_t` and its solution.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModel {
    pub layout: GlobalLayout,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub a0: DVector<f64>,
    pub a1: DVector<f64>,
    /// Block-diagonal country residual covariances.
    pub sigma_eps: DMatrix<f64>,
    pub condition_number: f64,
    pub solved: SolvedGlobal,
}

impl GlobalModel {
    /// Structural residuals `G x_t − a0 − a1·t − H x_{t−1}` for rows `1..T` of
    /// a `T × k` data matrix.
    pub fn structural_residuals(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let t = data.nrows();
        let mut out = DMatrix::zeros(t.saturating_sub(1), self.layout.dim());
        for s in 1..t {
            let x = data.row(s).transpose();
            let x_prev = data.row(s - 1).transpose();
            let e = &self.g * x - &self.a0 - &self.a1 * s as f64 - &self.h * x_prev;
            out.row_mut(s - 1).copy_from(&e.transpose());
        }
        out
    }
}

/// Assemble `G`, `H`, `a0`, `a1` and `Σ_ε` from country models and links,
/// then solve for the reduced form.
pub fn stack_global(
    layout: &GlobalLayout,
    models: &[CountryModel],
    links: &[LinkMatrix],
    opts: &StackOptions,
) -> Result<GlobalModel, GvarError> {
    let n = layout.n_countries();
    let kv = layout.n_variables();
    let k = layout.dim();
    if models.len() != n || links.len() != n {
        return Err(GvarError::Config(format!(
            "expected {n} country models and links, got {} and {}",
            models.len(),
            links.len()
        )));
    }
    let mut g = DMatrix::zeros(k, k);
    let mut h = DMatrix::zeros(k, k);
    let mut a0 = DVector::zeros(k);
    let mut a1 = DVector::zeros(k);
    let mut sigma_eps = DMatrix::zeros(k, k);
    for (i, (m, l)) in models.iter().zip(links).enumerate() {
        let name = &layout.countries[i];
        if &m.country != name || &l.country != name {
            return Err(GvarError::Config(format!(
                "country order mismatch at position {i}: layout has '{name}', model '{}', link '{}'",
                m.country, l.country
            )));
        }
        m.validate()?;
        if m.k() != kv || m.k_star() != kv || l.w.shape() != (2 * kv, k) {
            return Err(GvarError::Config(format!("{name}: model dimensions do not match the global layout")));
        }
        let r = i * kv;
        g.view_mut((r, 0), (kv, k)).copy_from(&(m.a_matrix() * &l.w));
        h.view_mut((r, 0), (kv, k)).copy_from(&(m.b_matrix() * &l.w));
        a0.rows_mut(r, kv).copy_from(&m.a0);
        a1.rows_mut(r, kv).copy_from(&m.a1);
        sigma_eps.view_mut((r, r), (kv, kv)).copy_from(&m.sigma);
    }
    solve_global(layout.clone(), g, h, a0, a1, sigma_eps, opts)
}

/// Solve a stacked structural system after checking that `G` is well
/// conditioned.
pub fn solve_global(
    layout: GlobalLayout,
    g: DMatrix<f64>,
    h: DMatrix<f64>,
    a0: DVector<f64>,
    a1: DVector<f64>,
    sigma_eps: DMatrix<f64>,
    opts: &StackOptions,
) -> Result<GlobalModel, GvarError> {
    let svd = g.clone().svd(true, false);
    let sv = &svd.singular_values;
    let (i_min, s_min) =
        sv.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (i, s)| if s < a.1 { (i, s) } else { a });
    let s_max = sv.iter().copied().fold(0.0, f64::max);
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !(condition <= opts.condition_ceiling) {
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let kv = layout.n_variables();
        let weight = |c: usize| (0..kv).map(|v| u[(c * kv + v, i_min)].powi(2)).sum::<f64>();
        let worst = (0..layout.n_countries()).max_by(|&a, &b| weight(a).total_cmp(&weight(b))).unwrap_or(0);
        return Err(GvarError::Singular { country: layout.countries[worst].clone(), condition });
    }
    let g_inv = g.clone().lu().try_inverse().ok_or_else(|| GvarError::Numerical("LU inversion of G failed".into()))?;
    let solved = SolvedGlobal {
        b0: &g_inv * &a0,
        b1: &g_inv * &a1,
        f: &g_inv * &h,
        sigma_e: linalg::symmetrize(&(&g_inv * &sigma_eps * g_inv.transpose())),
    };
    Ok(GlobalModel { layout, g, h, a0, a1, sigma_eps, condition_number: condition, solved })
}

/// Country models, links and the solved global model estimated by least
/// squares on a panel.
#[derive(Debug, Clone)]
pub struct GvarEstimate {
    pub models: Vec<CountryModel>,
    pub links: Vec<LinkMatrix>,
    pub global: GlobalModel,
}

pub fn estimate_gvar(
    panel: &Panel,
    weights: &WeightMatrix,
    det: Deterministic,
    opts: &StackOptions,
) -> Result<GvarEstimate, GvarError> {
    let layout = GlobalLayout::from_panel(panel);
    let cols = weight_columns(panel, weights)?;
    if cols.len() != layout.n_countries() || cols.iter().enumerate().any(|(i, &c)| i != c) {
        return Err(GvarError::Config("weight matrix countries must match the panel countries in order".into()));
    }
    let vars = layout.variables.clone();
    let mut models = Vec::with_capacity(layout.n_countries());
    let mut links = Vec::with_capacity(layout.n_countries());
    for (i, c) in layout.countries.iter().enumerate() {
        let star = build_star(panel, weights, c)?;
        models.push(estimate_varx(c, &vars, &vars, &panel.country_block(i), &star, det)?);
        links.push(build_link(&layout, c, weights)?);
    }
    let global = stack_global(&layout, &models, &links, opts)?;
    Ok(GvarEstimate { models, links, global })
}
