use bgvar_core::regress::ols_simple;
use bgvar_core::var::{estimate_var, is_stable, residual_rms, select_lag, var_stability, InfoCriterion};
use bgvar_core::Deterministic;
use bgvar_testkit::{normal, normal_matrix, oracle_moduli, rng, simulate_var};
use nalgebra::{DMatrix, DVector};

fn var1_truth() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.3])
}

#[test]
fn recovers_planted_var1() {
    let phi = var1_truth();
    let c = DVector::from_vec(vec![0.2, -0.1]);
    let chol = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.3, 0.8]);
    let mut hits = 0;
    for seed in 0..100 {
        let data = simulate_var(&mut rng(seed), &c, None, std::slice::from_ref(&phi), &chol, 500, 100);
        let est = estimate_var(&data, 1, Deterministic::Constant).unwrap();
        if (&est.phi[0] - &phi).amax() < 0.1 {
            hits += 1;
        }
    }
    assert!(hits >= 90, "recovered in {hits} of 100 seeds");
}

#[test]
fn noise_block_has_insignificant_lags() {
    let mut clean = 0;
    for seed in 0..100 {
        let data = normal_matrix(&mut rng(500 + seed), 200, 3);
        let est = estimate_var(&data, 1, Deterministic::Constant).unwrap();
        let all_within = (0..3).all(|i| (0..3).all(|j| est.phi[0][(i, j)].abs() <= 3.0 * est.phi_std_error(1, i, j)));
        if all_within {
            clean += 1;
        }
    }
    // Nine independent 3-SE checks all pass with probability ≈ 0.976.
    assert!(clean >= 90, "{clean} of 100");
}

#[test]
fn scalar_var_equals_simple_ols() {
    let mut r = rng(11);
    let mut x = vec![0.0];
    for _ in 0..99 {
        let last = *x.last().unwrap();
        x.push(0.3 + 0.6 * last + normal(&mut r));
    }
    let block = DMatrix::from_column_slice(100, 1, &x);
    let est = estimate_var(&block, 1, Deterministic::Constant).unwrap();
    let ols = ols_simple(&x[..99], &x[1..]).unwrap();
    assert!((est.phi[0][(0, 0)] - ols.slopes[0]).abs() < 1e-12);
    assert!((est.alpha[0] - ols.intercept.unwrap()).abs() < 1e-12);
    for (a, b) in est.residuals.iter().zip(&ols.residuals) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn lag_selection() {
    let c = DVector::zeros(2);
    let id = DMatrix::identity(2, 2);
    let ones = (0..100)
        .filter(|&s| {
            let data = simulate_var(&mut rng(1000 + s), &c, None, &[var1_truth()], &id, 300, 100);
            select_lag(&data, 4, Deterministic::Constant, InfoCriterion::Bic).unwrap() == 1
        })
        .count();
    assert!(ones >= 80, "VAR(1) selected in {ones} of 100");

    let phi1 = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.1, 0.2]);
    let phi2 = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.5]);
    let twos = (0..100)
        .filter(|&s| {
            let data = simulate_var(&mut rng(2000 + s), &c, None, &[phi1.clone(), phi2.clone()], &id, 300, 100);
            select_lag(&data, 4, Deterministic::Constant, InfoCriterion::Bic).unwrap() == 2
        })
        .count();
    assert!(twos >= 80, "VAR(2) selected in {twos} of 100");
}

#[test]
fn rms_matches_direct_recomputation() {
    let data = simulate_var(
        &mut rng(3),
        &DVector::zeros(3),
        None,
        &[DMatrix::identity(3, 3) * 0.4],
        &DMatrix::identity(3, 3),
        120,
        50,
    );
    let est = estimate_var(&data, 2, Deterministic::ConstantTrend).unwrap();
    let rms = residual_rms(&est);
    let n = est.residuals.nrows();
    let mut pooled = 0.0;
    for j in 0..3 {
        let ss: f64 = (0..n).map(|t| est.residuals[(t, j)].powi(2)).sum();
        pooled += ss;
        assert!((rms.per_equation[j] - (ss / n as f64).sqrt()).abs() < 1e-12);
    }
    assert!((rms.pooled - (pooled / (3 * n) as f64).sqrt()).abs() < 1e-12);

    // Fitted values and residuals rebuild the estimation sample.
    for t in 0..n {
        for j in 0..3 {
            assert!((est.fitted[(t, j)] + est.residuals[(t, j)] - data[(t + 2, j)]).abs() < 1e-12);
        }
    }
    for j in 0..3 {
        assert!(est.residuals.column(j).sum().abs() < 1e-9);
    }
    assert!(bgvar_core::linalg::min_symmetric_eigenvalue(&est.sigma) >= -1e-12);
}

#[test]
fn stability_matches_characteristic_polynomial_roots() {
    let base = estimate_var(&normal_matrix(&mut rng(4), 60, 2), 2, Deterministic::Constant).unwrap();
    let mut checked = 0;
    for seed in 0..200 {
        let mut r = rng(9000 + seed);
        let mut est = base.clone();
        est.phi = vec![normal_matrix(&mut r, 2, 2) * 0.4, normal_matrix(&mut r, 2, 2) * 0.3];
        let moduli = var_stability(&est);
        if !is_stable(&moduli) {
            continue;
        }
        checked += 1;
        let oracle = oracle_moduli(&est.companion());
        for (a, b) in moduli.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "seed {seed}: {moduli:?} vs {oracle:?}");
        }
        // Rewriting the VAR(2) as a VAR(1) in companion form leaves the moduli unchanged.
        let mut one = est.clone();
        one.phi = vec![est.companion()];
        for (a, b) in var_stability(&one).iter().zip(&moduli) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    assert!(checked > 50);
}

#[test]
fn permutation_equivariance() {
    let data = simulate_var(
        &mut rng(6),
        &DVector::from_vec(vec![0.1, 0.2, 0.3]),
        None,
        &[DMatrix::identity(3, 3) * 0.5],
        &DMatrix::identity(3, 3),
        150,
        50,
    );
    let perm = [2usize, 0, 1];
    let permuted = DMatrix::from_fn(data.nrows(), 3, |t, j| data[(t, perm[j])]);
    let a = estimate_var(&data, 1, Deterministic::Constant).unwrap();
    let b = estimate_var(&permuted, 1, Deterministic::Constant).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((b.phi[0][(i, j)] - a.phi[0][(perm[i], perm[j])]).abs() < 1e-10);
            assert!((b.sigma[(i, j)] - a.sigma[(perm[i], perm[j])]).abs() < 1e-10);
        }
    }
}
