use bgvar_bayes::forecast::{forecast, Constraint, ForecastSpec, ShockMode};
use bgvar_bayes::girf::girf;
use bgvar_bayes::quantile::LEVELS;
use bgvar_bayes::rng::substream;
use bgvar_bayes::BayesError;
use bgvar_core::gvar::SolvedGlobal;
use bgvar_testkit::{normal_matrix, planted_global, rng};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn planted_model() -> SolvedGlobal {
    let p = planted_global(1.0);
    let mut sigma_e = &p.shock * p.shock.transpose() * 0.04;
    sigma_e[(0, 1)] += 0.005;
    sigma_e[(1, 0)] += 0.005;
    SolvedGlobal { b0: p.b0.clone(), b1: DVector::from_element(6, 0.001), f: p.f.clone(), sigma_e }
}

fn spec(n_ahead: usize, shocks: ShockMode, constraints: Vec<Constraint>) -> ForecastSpec {
    ForecastSpec { n_ahead, shocks, constraints, seed: 17 }
}

#[test]
fn zero_shock_forecast_is_the_deterministic_iteration() {
    let m = planted_model();
    let x0 = DVector::from_vec(vec![0.3, -0.1, 0.2, 0.5, 0.0, 0.1]);
    let p = forecast(&[&m, &m], &x0, 40, &spec(8, ShockMode::Zero, vec![])).unwrap();
    let path = m.iterate(&x0, 40, 8);
    for draw in &p.paths {
        for h in 0..8 {
            for j in 0..6 {
                assert_eq!(draw[(h, j)].to_bits(), path[h][j].to_bits());
            }
        }
    }
}

#[test]
fn simulated_one_step_moments() {
    let m = planted_model();
    let x0 = DVector::from_element(6, 0.2);
    let draws: Vec<&SolvedGlobal> = vec![&m; 20_000];
    let p = forecast(&draws, &x0, 0, &spec(1, ShockMode::Simulated, vec![])).unwrap();
    let mean_expected = m.step(&x0, 1.0);
    let n = p.paths.len() as f64;
    for j in 0..6 {
        let xs: Vec<f64> = p.paths.iter().map(|d| d[(0, j)]).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (m.sigma_e[(j, j)] / n).sqrt();
        assert!((mean - mean_expected[j]).abs() < 4.0 * se);
        assert!((var / m.sigma_e[(j, j)] - 1.0).abs() < 0.05);
    }
}

/// Joint Gaussian of the stacked path and its conditional moments, built
/// directly from the moving-average representation.
fn conditional_oracle(
    m: &SolvedGlobal,
    x0: &DVector<f64>,
    t0: usize,
    h_max: usize,
    fixed: &[(usize, usize, f64)],
) -> (DVector<f64>, DMatrix<f64>) {
    let k = m.dim();
    let n = k * h_max;
    let mut mean = DVector::zeros(n);
    let mut x = x0.clone();
    for h in 1..=h_max {
        x = &m.b0 + &m.b1 * (t0 + h) as f64 + &m.f * &x;
        mean.rows_mut((h - 1) * k, k).copy_from(&x);
    }
    // Path = mean + M e with M lower block-triangular in powers of F.
    let mut big_m = DMatrix::zeros(n, n);
    for h in 1..=h_max {
        let mut p = DMatrix::identity(k, k);
        for s in (1..=h).rev() {
            big_m.view_mut(((h - 1) * k, (s - 1) * k), (k, k)).copy_from(&p);
            p = &m.f * p;
        }
    }
    let mut omega = DMatrix::zeros(n, n);
    for h in 0..h_max {
        omega.view_mut((h * k, h * k), (k, k)).copy_from(&m.sigma_e);
    }
    let cov = &big_m * omega * big_m.transpose();
    let idx: Vec<usize> = fixed.iter().map(|&(i, h, _)| (h - 1) * k + i).collect();
    let c_bb = DMatrix::from_fn(idx.len(), idx.len(), |a, b| cov[(idx[a], idx[b])]);
    let c_ab = DMatrix::from_fn(n, idx.len(), |a, b| cov[(a, idx[b])]);
    let gap = DVector::from_fn(idx.len(), |a, _| fixed[a].2 - mean[idx[a]]);
    let inv = c_bb.try_inverse().unwrap();
    let cond_mean = &mean + &c_ab * &inv * gap;
    let cond_cov = &cov - &c_ab * inv * c_ab.transpose();
    (cond_mean, cond_cov)
}

#[test]
fn conditional_forecast_matches_gaussian_conditioning() {
    let m = planted_model();
    let x0 = DVector::from_vec(vec![0.3, -0.1, 0.2, 0.5, 0.0, 0.1]);
    let fixed = [(1usize, 2usize, 0.4f64), (4, 3, -0.2), (1, 4, 0.1)];
    let constraints: Vec<Constraint> =
        fixed.iter().map(|&(index, horizon, value)| Constraint { index, horizon, value, half_width: 0.0 }).collect();
    let (oracle_mean, oracle_cov) = conditional_oracle(&m, &x0, 20, 4, &fixed);

    let p = forecast(&[&m], &x0, 20, &spec(4, ShockMode::Zero, constraints.clone())).unwrap();
    for h in 0..4 {
        for j in 0..6 {
            assert!((p.paths[0][(h, j)] - oracle_mean[h * 6 + j]).abs() < 1e-10, "({h}, {j})");
        }
    }

    let draws: Vec<&SolvedGlobal> = vec![&m; 20_000];
    let p = forecast(&draws, &x0, 20, &spec(4, ShockMode::Simulated, constraints)).unwrap();
    let n = p.paths.len() as f64;
    for &(i, h, v) in &fixed {
        assert!(p.paths.iter().all(|d| d[(h - 1, i)] == v));
    }
    for idx in [0usize, 8, 14, 23] {
        let (h, j) = (idx / 6, idx % 6);
        let xs: Vec<f64> = p.paths.iter().map(|d| d[(h, j)]).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = oracle_cov[(idx, idx)].sqrt();
        assert!((mean - oracle_mean[idx]).abs() < 4.0 * sd / n.sqrt(), "mean at {idx}");
        assert!((var / oracle_cov[(idx, idx)] - 1.0).abs() < 0.06, "variance at {idx}");
    }
}

#[test]
fn band_conditioning_stays_within_half_width() {
    let m = planted_model();
    let x0 = DVector::from_element(6, 0.1);
    let value = 2.5;
    let hw = 0.001 * value;
    let c: Vec<Constraint> = (1..=6).map(|h| Constraint { index: 3, horizon: h, value, half_width: hw }).collect();
    let draws: Vec<&SolvedGlobal> = vec![&m; 500];
    let p = forecast(&draws, &x0, 0, &spec(6, ShockMode::Simulated, c)).unwrap();
    for h in 0..6 {
        let xs: Vec<f64> = p.paths.iter().map(|d| d[(h, 3)]).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= 2.0 * hw && hi - lo > 0.0);
        assert!(lo >= value - hw && hi <= value + hw);
    }
}

#[test]
fn contradictory_or_invalid_constraints_fail() {
    let m = planted_model();
    let x0 = DVector::zeros(6);
    let c = Constraint { index: 0, horizon: 1, value: 1.0, half_width: 0.0 };
    let dup = spec(2, ShockMode::Zero, vec![c, Constraint { value: 2.0, ..c }]);
    assert!(matches!(forecast(&[&m], &x0, 0, &dup), Err(BayesError::Numerical(_))));
    let bad_index = spec(2, ShockMode::Zero, vec![Constraint { index: 6, ..c }]);
    assert!(matches!(forecast(&[&m], &x0, 0, &bad_index), Err(BayesError::Config(_))));
    let bad_h = spec(2, ShockMode::Zero, vec![Constraint { horizon: 3, ..c }]);
    assert!(matches!(forecast(&[&m], &x0, 0, &bad_h), Err(BayesError::Config(_))));
    let mut frozen = m.clone();
    frozen.sigma_e = DMatrix::zeros(6, 6);
    let ok = spec(2, ShockMode::Zero, vec![c]);
    assert!(matches!(forecast(&[&frozen], &x0, 0, &ok), Err(BayesError::Numerical(_))));
}

#[test]
fn forecasts_are_reproducible_per_seed() {
    let m = planted_model();
    let x0 = DVector::zeros(6);
    let draws: Vec<&SolvedGlobal> = vec![&m; 50];
    let a = forecast(&draws, &x0, 0, &spec(5, ShockMode::Simulated, vec![])).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| forecast(&draws, &x0, 0, &spec(5, ShockMode::Simulated, vec![])).unwrap());
    assert_eq!(a, b);
    let q = a.quantiles(&LEVELS);
    for h in 0..5 {
        for j in 0..6 {
            for l in 1..5 {
                assert!(q[l - 1][(h, j)] <= q[l][(h, j)]);
            }
        }
    }
}

#[test]
fn girf_closed_form_on_a_hand_model() {
    let m = SolvedGlobal {
        b0: DVector::zeros(2),
        b1: DVector::zeros(2),
        f: DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.3]),
        sigma_e: DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]),
    };
    let r = girf(&m, 0, 2).unwrap();
    // Impact Σ e_1 / 2 = (2, 0.5); then F·impact.
    let want = [[2.0, 0.5], [1.1, 0.15], [0.58, 0.045]];
    for h in 0..3 {
        for j in 0..2 {
            assert!((r[(h, j)] - want[h][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn girf_matches_simulated_conditional_expectation() {
    let m = planted_model();
    let (k, shock, horizon) = (6, 2, 3);
    let l = m.sigma_e.clone().cholesky().unwrap().l();
    let n = 100_000;
    let mut rng = substream(99, "girf-oracle");
    let mut fh = DMatrix::identity(k, k);
    for _ in 0..horizon {
        fh = &m.f * fh;
    }
    // Regress the horizon-h response F^h e on the shocked component e_j.
    let mut sxy = DVector::zeros(k);
    let mut sxx = 0.0;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let e = &l * DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
        let y = &fh * &e;
        sxy += &y * e[shock];
        sxx += e[shock] * e[shock];
        samples.push((e[shock], y));
    }
    let slope = &sxy / sxx;
    let delta = m.sigma_e[(shock, shock)].sqrt();
    let est = &slope * delta;
    let exact = girf(&m, shock, horizon).unwrap().row(horizon).transpose();
    for j in 0..k {
        let resid_var = samples.iter().map(|(x, y)| (y[j] - slope[j] * x).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (resid_var / sxx).sqrt() * delta;
        assert!((est[j] - exact[j]).abs() < 3.0 * se, "variable {j}: {} vs {}", est[j], exact[j]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn girf_is_permutation_equivariant(seed in 0u64..10_000, shock in 0usize..4) {
        let k = 4;
        let mut r = rng(seed);
        let f = normal_matrix(&mut r, k, k) * 0.2;
        let a = normal_matrix(&mut r, k, k);
        let sigma_e = &a * a.transpose() + DMatrix::identity(k, k) * 0.1;
        let m = SolvedGlobal { b0: DVector::zeros(k), b1: DVector::zeros(k), f, sigma_e };
        let perm = [2usize, 0, 3, 1];
        let p = DMatrix::from_fn(k, k, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let mp = SolvedGlobal {
            b0: DVector::zeros(k),
            b1: DVector::zeros(k),
            f: &p * &m.f * p.transpose(),
            sigma_e: &p * &m.sigma_e * p.transpose(),
        };
        let new_shock = perm.iter().position(|&j| j == shock).unwrap();
        let base = girf(&m, shock, 5).unwrap();
        let permuted = girf(&mp, new_shock, 5).unwrap();
        let expected = base * p.transpose();
        for (x, y) in permuted.iter().zip(expected.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
