use bgvar_core::regress::{ols_fit, ols_simple, rolling_ols, RegressError};
use bgvar_testkit::{normal, rng, white_noise};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Residual sum of squares of `y − [1, X]·b`, computed with plain loops.
fn rss_at(x: &DMatrix<f64>, y: &[f64], b: &[f64]) -> f64 {
    (0..y.len())
        .map(|i| {
            let pred = b[0] + (0..x.ncols()).map(|j| x[(i, j)] * b[j + 1]).sum::<f64>();
            (y[i] - pred).powi(2)
        })
        .sum()
}

fn random_design(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let x = DMatrix::from_fn(n, p, |_, _| normal(&mut r));
    let beta: Vec<f64> = (0..=p).map(|_| normal(&mut r)).collect();
    let y =
        (0..n).map(|i| beta[0] + (0..p).map(|j| x[(i, j)] * beta[j + 1]).sum::<f64>() + 0.1 * normal(&mut r)).collect();
    (x, y, beta)
}

#[test]
fn grid_scan_never_beats_the_fit() {
    let steps = [-1.0, -0.1, -1e-2, -1e-3, -1e-4, 1e-4, 1e-3, 1e-2, 0.1, 1.0];
    let mut within = 0;
    let mut total = 0;
    for seed in 0..50 {
        let (x, y, beta) = random_design(seed, 50, 3);
        let fit = ols_fit(&x, &y, true).unwrap();
        let b = fit.coefficients();
        let base = rss_at(&x, &y, &b);
        assert!((base - fit.rss).abs() <= 1e-12 * base.max(1.0));
        for j in 0..b.len() {
            for k in j..b.len() {
                for s in steps {
                    for s2 in [s, -s] {
                        let mut trial = b.clone();
                        trial[j] += s;
                        if k != j {
                            trial[k] += s2;
                        }
                        assert!(rss_at(&x, &y, &trial) >= base * (1.0 - 1e-12), "seed {seed}: lower RSS found");
                    }
                }
            }
        }
        for j in 0..x.ncols() {
            let dot: f64 = (0..50).map(|i| x[(i, j)] * fit.residuals[i]).sum();
            assert!(dot.abs() < 1e-9, "seed {seed}: residuals not orthogonal to column {j}");
        }
        assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9);
        for (est, (se, truth)) in b.iter().zip(fit.std_errors.iter().zip(&beta)) {
            total += 1;
            if (est - truth).abs() <= 3.0 * se {
                within += 1;
            }
        }
    }
    // Under correct coverage about 99.7% of the 200 intervals contain the truth.
    assert!(within as f64 / total as f64 >= 0.97, "{within}/{total} within 3 SE");
}

#[test]
fn exact_and_degenerate_fits() {
    let fit = ols_simple(&[0.0, 1.0], &[1.0, 3.0]).unwrap();
    assert!((fit.slopes[0] - 2.0).abs() < 1e-12 && (fit.intercept.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(fit.r_squared, 1.0);

    let x = [1.0, 4.0, 2.0, 8.0, 5.0];
    let fit = ols_simple(&x, &[3.0; 5]).unwrap();
    assert!(fit.slopes[0].abs() < 1e-12);
    assert!((fit.intercept.unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(fit.r_squared, 0.0);
}

#[test]
fn collinear_design_is_named() {
    let x = DMatrix::from_fn(10, 2, |i, j| (i as f64) * (j as f64 + 1.0));
    let y: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
    assert!(matches!(ols_fit(&x, &y, true), Err(RegressError::Multicollinear { column: 2, .. })));
}

#[test]
fn rolling_identity_and_window_count() {
    let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin() * 3.0 + i as f64 * 0.1).collect();
    let r = rolling_ols(&x, &x, 6).unwrap();
    assert_eq!(r.fits.len(), 30 - 6 + 1);
    assert!(r.fits.iter().all(|f| (f.r_squared - 1.0).abs() < 1e-12));
    assert!((r.mean_adj_r_squared - 1.0).abs() < 1e-12);
    assert!(matches!(rolling_ols(&x, &x, 3), Err(RegressError::Config(_))));
}

#[test]
fn rolling_noise_pair_centres_near_zero() {
    let mut means = Vec::new();
    for seed in 0..200 {
        let mut r = rng(1000 + seed);
        let x = white_noise(&mut r, 60);
        let y = white_noise(&mut r, 60);
        means.push(rolling_ols(&x, &y, 20).unwrap().mean_adj_r_squared);
    }
    let avg = means.iter().sum::<f64>() / means.len() as f64;
    assert!(avg.abs() < 0.03, "average mean adjusted R² {avg}");
    assert!(means.iter().any(|m| *m < 0.0), "negative mean adjusted R² never occurred");
}

/// Slope from the two-variable closed form `cov(x, y) / var(x)`.
fn oracle_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn regime_change_transition_band() {
    let n = 60;
    let window = 10;
    let x: Vec<f64> = (0..n).map(|i| ((i * 37) % 17) as f64 - 8.0 + 0.1 * i as f64).collect();
    let y: Vec<f64> = (0..n).map(|i| if i < 30 { x[i] } else { -x[i] }).collect();
    let r = rolling_ols(&x, &y, window).unwrap();
    let mut mixed = 0;
    for (s, fit) in r.fits.iter().enumerate() {
        let slope = fit.slopes[0];
        assert!((slope - oracle_slope(&x[s..s + window], &y[s..s + window])).abs() < 1e-10);
        if s + window <= 30 {
            assert!((slope - 1.0).abs() < 1e-10);
        } else if s >= 30 {
            assert!((slope + 1.0).abs() < 1e-10);
        } else {
            mixed += 1;
            assert!(slope > -1.0 && slope < 1.0);
        }
    }
    assert_eq!(mixed, window - 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_changes_only_intercept(seed in 0u64..10_000, shift in -50.0f64..50.0) {
        let (x, y, _) = random_design(seed, 30, 2);
        let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let a = ols_fit(&x, &y, true).unwrap();
        let b = ols_fit(&x, &shifted, true).unwrap();
        for (s, t) in a.slopes.iter().zip(&b.slopes) {
            prop_assert!((s - t).abs() < 1e-9);
        }
        prop_assert!((a.intercept.unwrap() + shift - b.intercept.unwrap()).abs() < 1e-9);
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-9);
        prop_assert!((a.f_pvalue - b.f_pvalue).abs() < 1e-9);
    }

    #[test]
    fn r2_is_squared_correlation(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let x = white_noise(&mut r, 25);
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v + normal(&mut r)).collect();
        let fit = ols_simple(&x, &y).unwrap();
        let c = bgvar_core::linalg::correlation(&y, &fit.fitted);
        prop_assert!((fit.r_squared - c * c).abs() < 1e-9);
        prop_assert!(fit.adj_r_squared <= fit.r_squared);
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn windows_equal_isolated_fits(seed in 0u64..10_000, window in 4usize..15) {
        let mut r = rng(seed);
        let x = white_noise(&mut r, 30);
        let y = white_noise(&mut r, 30);
        let roll = rolling_ols(&x, &y, window).unwrap();
        prop_assert_eq!(roll.fits.len(), 30 - window + 1);
        for (s, fit) in roll.fits.iter().enumerate() {
            let alone = ols_simple(&x[s..s + window], &y[s..s + window]).unwrap();
            prop_assert_eq!(fit, &alone);
        }
    }
}
