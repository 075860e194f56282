//! Gibbs sampler for a multivariate regression `Y = X B + U`,
//! `U_t ~ N(0, Σ)`, under a hierarchical Normal-Gamma prior on the slope
//! coefficients and an inverse-Wishart prior on `Σ`.
//!
//! Each shrunk coefficient has `β ~ N(0, τ)`, `τ ~ Gamma(θ, rate θλ²/2)` and
//! every coefficient group shares `λ² ~ Gamma(c0, rate d0)`. Deterministic
//! terms get a fixed `N(0, v)` prior.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::gig::sample_gig;
use crate::wishart::sample_inverse_wishart;
use crate::BayesError;

/// Bounds applied to every local variance draw.
pub const TAU_BOUNDS: (f64, f64) = (1e-10, 1e10);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgPrior {
    pub theta: f64,
    pub c0: f64,
    pub d0: f64,
    /// Prior variance of intercepts and trend coefficients.
    pub deterministic_variance: f64,
}

impl Default for NgPrior {
    fn default() -> Self {
        NgPrior { theta: 0.6, c0: 0.01, d0: 0.01, deterministic_variance: 100.0 }
    }
}

impl NgPrior {
    pub fn validate(&self) -> Result<(), BayesError> {
        let ok = [self.theta, self.c0, self.d0, self.deterministic_variance].iter().all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(BayesError::Config(format!("prior hyperparameters must be positive and finite: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub n_draws: usize,
    pub n_burn: usize,
    pub thin: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { n_draws: 1000, n_burn: 1000, thin: 1 }
    }
}

impl Schedule {
    pub const MIN_DRAWS: usize = 100;

    pub fn validate(&self) -> Result<(), BayesError> {
        if self.n_draws < Self::MIN_DRAWS {
            return Err(BayesError::Config(format!(
                "n_draws = {} is below the minimum of {}",
                self.n_draws,
                Self::MIN_DRAWS
            )));
        }
        if self.thin == 0 {
            return Err(BayesError::Config("thin must be at least 1".into()));
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.n_burn + self.n_draws * self.thin
    }

    fn retains(&self, iter: usize) -> bool {
        iter >= self.n_burn && (iter - self.n_burn + 1).is_multiple_of(self.thin)
    }
}

/// Prior attached to one regressor (one row of `B`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefPrior {
    /// `N(0, v)` with fixed `v`.
    Fixed(f64),
    /// Normal-Gamma shrinkage in the given group.
    Shrunk(usize),
}

#[derive(Debug, Clone)]
pub struct RegressionChain {
    /// Retained `m × k` coefficient draws.
    pub coefs: Vec<DMatrix<f64>>,
    /// Retained `k × k` covariance draws.
    pub sigmas: Vec<DMatrix<f64>>,
    /// Average over retained iterations of the conditional posterior means.
    pub rb_mean: DMatrix<f64>,
    /// Retained global shrinkage draws, one entry per group.
    pub lambda2: Vec<Vec<f64>>,
}

/// Run the chain. `prior_scale` is the diagonal of the inverse-Wishart
/// scale; the prior has `k + 2` degrees of freedom so its mean equals
/// `diag(prior_scale)`.
pub fn sample_regression<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    rows: &[CoefPrior],
    prior_scale: &DVector<f64>,
    prior: &NgPrior,
    schedule: &Schedule,
    rng: &mut R,
) -> Result<RegressionChain, BayesError> {
    prior.validate()?;
    schedule.validate()?;
    let (n, m) = x.shape();
    let k = y.ncols();
    if y.nrows() != n || rows.len() != m || prior_scale.len() != k {
        return Err(BayesError::Config("regression dimensions are inconsistent".into()));
    }
    if n == 0 || k == 0 {
        return Err(BayesError::Config("empty regression".into()));
    }
    if prior_scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(BayesError::Degenerate("covariance prior scale must be positive".into()));
    }
    let n_groups = rows
        .iter()
        .filter_map(|r| match r {
            CoefPrior::Shrunk(g) => Some(g + 1),
            CoefPrior::Fixed(_) => None,
        })
        .max()
        .unwrap_or(0);
    let mut group_size = vec![0usize; n_groups];
    for r in rows {
        if let CoefPrior::Shrunk(g) = r {
            group_size[*g] += 1;
        }
    }
    let xtx = x.transpose() * x;
    let s0 = DMatrix::from_diagonal(prior_scale);
    let nu_post = (k + 2 + n) as f64;

    // Start from least squares when it is available.
    let mut b = match bgvar_core::linalg::least_squares(x, y) {
        Ok(ls) if n > m => ls.coef,
        _ => DMatrix::zeros(m, k),
    };
    let mut resid = y - x * &b;
    let mut precision = DMatrix::from_diagonal(&prior_scale.map(|s| 1.0 / s));
    let mut tau = DMatrix::from_element(m, k, 1.0);
    let mut lambda2 = vec![1.0; n_groups];

    let mut out = RegressionChain {
        coefs: Vec::with_capacity(schedule.n_draws),
        sigmas: Vec::with_capacity(schedule.n_draws),
        rb_mean: DMatrix::zeros(m, k),
        lambda2: Vec::with_capacity(schedule.n_draws),
    };
    let mut cond_mean = DMatrix::zeros(m, k);
    let fail = |iter: usize, message: String| BayesError::Sampler { draw: iter, country: None, message };

    for iter in 0..schedule.total_iterations() {
        // Coefficients, one equation at a time given the others.
        for j in 0..k {
            let pjj = precision[(j, j)];
            let mut y_tilde = y.column(j).into_owned();
            for l in 0..k {
                if l != j && precision[(j, l)] != 0.0 {
                    y_tilde.axpy(precision[(j, l)] / pjj, &resid.column(l), 1.0);
                }
            }
            let mut q = &xtx * pjj;
            for r in 0..m {
                let v = match rows[r] {
                    CoefPrior::Fixed(v) => v,
                    CoefPrior::Shrunk(_) => tau[(r, j)],
                };
                q[(r, r)] += 1.0 / v;
            }
            let chol = nalgebra::Cholesky::new(q)
                .ok_or_else(|| fail(iter, format!("coefficient precision of equation {j} is not positive definite")))?;
            let rhs = x.transpose() * &y_tilde * pjj;
            let mean = chol.solve(&rhs);
            let z = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
            let l_t = chol.l().transpose();
            let noise = l_t.solve_upper_triangular(&z).ok_or_else(|| fail(iter, "triangular solve failed".into()))?;
            let draw = &mean + noise;
            b.column_mut(j).copy_from(&draw);
            cond_mean.column_mut(j).copy_from(&mean);
            let r = y.column(j) - x * &draw;
            resid.column_mut(j).copy_from(&r);
        }

        // Residual covariance.
        let scale = &s0 + resid.transpose() * &resid;
        let (sigma, prec) = sample_inverse_wishart(rng, nu_post, &scale)
            .ok_or_else(|| fail(iter, "residual covariance draw is not positive definite".into()))?;
        precision = prec;

        // Local and global shrinkage.
        let mut tau_sum = vec![0.0; n_groups];
        for r in 0..m {
            if let CoefPrior::Shrunk(g) = rows[r] {
                for j in 0..k {
                    let beta2 = b[(r, j)] * b[(r, j)];
                    let t = sample_gig(rng, prior.theta - 0.5, beta2, prior.theta * lambda2[g])
                        .map_err(|e| fail(iter, e))?;
                    let t = t.clamp(TAU_BOUNDS.0, TAU_BOUNDS.1);
                    tau[(r, j)] = t;
                    tau_sum[g] += t;
                }
            }
        }
        for g in 0..n_groups {
            let shape = prior.c0 + prior.theta * (group_size[g] * k) as f64;
            let rate = prior.d0 + 0.5 * prior.theta * tau_sum[g];
            let gamma = Gamma::new(shape, 1.0 / rate).map_err(|e| fail(iter, e.to_string()))?;
            lambda2[g] = gamma.sample(rng);
        }

        if schedule.retains(iter) {
            out.coefs.push(b.clone());
            out.sigmas.push(sigma);
            out.rb_mean += &cond_mean;
            out.lambda2.push(lambda2.clone());
        }
    }
    out.rb_mean /= out.coefs.len() as f64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retention_pattern() {
        let s = Schedule { n_draws: 3, n_burn: 2, thin: 2 };
        let kept: Vec<usize> = (0..s.total_iterations()).filter(|&i| s.retains(i)).collect();
        assert_eq!(kept, vec![3, 5, 7]);
    }

    #[test]
    fn schedule_minimum() {
        assert!(Schedule { n_draws: 99, ..Schedule::default() }.validate().is_err());
        assert!(Schedule { thin: 0, ..Schedule::default() }.validate().is_err());
        assert!(Schedule::default().validate().is_ok());
    }
}
