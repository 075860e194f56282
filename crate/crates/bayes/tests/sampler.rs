mod common;

use bgvar_bayes::drawfile::{read_draws, write_draws};
use bgvar_bayes::ng::{sample_regression, CoefPrior, NgPrior, Schedule};
use bgvar_bayes::rng::substream;
use bgvar_bayes::sampler::{assemble, CountryDraw};
use bgvar_bayes::{filter_stable, sample_posterior, BayesError, PosteriorDraws};
use bgvar_core::gvar::{GlobalLayout, StackOptions};
use bgvar_core::linalg::least_squares;
use bgvar_core::Deterministic;
use bgvar_testkit::{normal_matrix, oracle_moduli, planted_global, rng, simulate_planted};
use common::{panel_from_global, weights};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn small_schedule(n_draws: usize, n_burn: usize) -> Schedule {
    Schedule { n_draws, n_burn, thin: 1 }
}

fn column_variance(y: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(y.ncols(), |j, _| {
        let c = y.column(j);
        let m = c.mean();
        c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (c.len() - 1) as f64
    })
}

#[test]
fn sparse_truth_is_shrunk_toward_zero() {
    let (n, m) = (100, 20);
    let mut wins = 0;
    for seed in 0..100u64 {
        let mut r = rng(1000 + seed);
        let x = normal_matrix(&mut r, n, m);
        let mut beta = DMatrix::zeros(m, 1);
        beta[(0, 0)] = 1.0;
        let y = &x * &beta + normal_matrix(&mut r, n, 1);
        let ls = least_squares(&x, &y).unwrap().coef;
        let rows = vec![CoefPrior::Shrunk(0); m];
        let chain = sample_regression(
            &x,
            &y,
            &rows,
            &column_variance(&y),
            &NgPrior::default(),
            &small_schedule(300, 300),
            &mut substream(seed, "shrink"),
        )
        .unwrap();
        // The zero block as a whole must sit closer to the origin.
        let post: f64 = (1..m)
            .map(|i| (chain.coefs.iter().map(|c| c[(i, 0)]).sum::<f64>() / chain.coefs.len() as f64).powi(2))
            .sum();
        let lsq: f64 = (1..m).map(|i| ls[(i, 0)].powi(2)).sum();
        wins += (post < lsq) as usize;
    }
    assert!(wins >= 90, "zero coefficients shrunk in {wins}/100 seeds");
}

/// Batch-means Monte Carlo standard error of a chain's mean.
fn mc_se(chain: &[f64], batches: usize) -> f64 {
    let len = chain.len() / batches;
    let means: Vec<f64> =
        (0..batches).map(|b| chain[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64).collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

#[test]
fn vague_prior_recovers_least_squares() {
    let (n, m, k) = (200, 6, 3);
    let mut r = rng(77);
    let mut x = normal_matrix(&mut r, n, m);
    x.column_mut(0).fill(1.0);
    let b = normal_matrix(&mut r, m, k) * 0.5;
    let y = &x * &b + normal_matrix(&mut r, n, k);
    let ls = least_squares(&x, &y).unwrap().coef;
    let prior = NgPrior { theta: 50.0, c0: 0.01, d0: 1e10, deterministic_variance: 1e10 };
    let mut rows = vec![CoefPrior::Fixed(prior.deterministic_variance)];
    rows.extend(vec![CoefPrior::Shrunk(0); m - 1]);
    let chain = sample_regression(
        &x,
        &y,
        &rows,
        &column_variance(&y),
        &prior,
        &small_schedule(4000, 500),
        &mut substream(3, "vague"),
    )
    .unwrap();
    let mut z2 = Vec::new();
    for i in 0..m {
        for j in 0..k {
            let draws: Vec<f64> = chain.coefs.iter().map(|c| c[(i, j)]).collect();
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            let z = (mean - ls[(i, j)]) / mc_se(&draws, 20);
            assert!(z.abs() < 4.0, "coefficient ({i}, {j}) is {z:.2} MC standard errors from least squares");
            z2.push(z * z);
        }
    }
    let rms = (z2.iter().sum::<f64>() / z2.len() as f64).sqrt();
    assert!(rms <= 2.0, "root mean squared z = {rms}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn orthonormal_design_means_lie_between_zero_and_ls(seed in 0u64..1000) {
        let (n, m) = (60, 8);
        let mut r = rng(seed);
        let q = normal_matrix(&mut r, n, m).qr().q() * (n as f64).sqrt();
        let y = q.columns(0, 2) * DMatrix::from_vec(2, 1, vec![0.8, -0.5]) + normal_matrix(&mut r, n, 1);
        let ls = least_squares(&q, &y).unwrap().coef;
        let chain = sample_regression(
            &q,
            &y,
            &vec![CoefPrior::Shrunk(0); m],
            &column_variance(&y),
            &NgPrior::default(),
            &small_schedule(100, 50),
            &mut substream(seed, "ortho"),
        )
        .unwrap();
        for i in 0..m {
            let ratio = chain.rb_mean[(i, 0)] / ls[(i, 0)];
            prop_assert!((0.0..=1.0).contains(&ratio), "coefficient {} ratio {}", i, ratio);
        }
    }
}

#[test]
fn overflowing_data_reports_the_failing_iteration() {
    let mut r = rng(5);
    let x = normal_matrix(&mut r, 40, 2);
    let y = normal_matrix(&mut r, 40, 2) * 1e200;
    let err = sample_regression(
        &x,
        &y,
        &[CoefPrior::Shrunk(0); 2],
        &DVector::from_element(2, 1.0),
        &NgPrior::default(),
        &Schedule::default(),
        &mut substream(1, "bad"),
    )
    .unwrap_err();
    assert!(matches!(err, BayesError::Sampler { draw: 0, .. }), "{err}");
}

fn planted_posterior(
    seed: u64,
    n_draws: usize,
) -> (PosteriorDraws, bgvar_core::panel::Panel, bgvar_core::weights::WeightMatrix) {
    let planted = planted_global(0.5);
    let data = simulate_planted(&mut rng(11), &planted, 120, 100);
    let panel = panel_from_global(&data, 3, 2);
    let w = weights(&planted.weights);
    let draws = sample_posterior(
        &panel,
        &w,
        Deterministic::Constant,
        &NgPrior::default(),
        &small_schedule(n_draws, 200),
        seed,
        &StackOptions::default(),
    )
    .unwrap();
    (draws, panel, w)
}

fn draw_bytes(d: &PosteriorDraws) -> Vec<u8> {
    let mut buf = Vec::new();
    write_draws(d, &mut buf).unwrap();
    buf
}

#[test]
fn draws_are_reproducible_across_runs_and_thread_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| draw_bytes(&planted_posterior(42, 150).0))
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(4));
    assert_ne!(one, draw_bytes(&planted_posterior(43, 150).0));
}

#[test]
fn draw_file_round_trip_is_bit_exact() {
    let (mut draws, _, _) = planted_posterior(7, 120);
    draws.config_hash = "abc123".into();
    let bytes = draw_bytes(&draws);
    let back = read_draws(bytes.as_slice(), &StackOptions::default()).unwrap();
    assert_eq!(back.config_hash, "abc123");
    assert_eq!((back.seed, back.n_burn, back.thin), (7, 200, 1));
    assert_eq!(back.draws, draws.draws);
    assert_eq!(draw_bytes(&back), bytes);
    let truncated = &bytes[..bytes.len() / 2];
    assert!(matches!(read_draws(truncated, &StackOptions::default()), Err(BayesError::Parse { .. })));
}

#[test]
fn stability_flags_agree_with_root_oracle() {
    // Random-walk data put posterior mass on both sides of the unit circle.
    let mut r = rng(21);
    let mut data = normal_matrix(&mut r, 100, 6);
    for t in 1..100 {
        for j in 0..6 {
            data[(t, j)] += data[(t - 1, j)];
        }
    }
    let panel = panel_from_global(&data, 3, 2);
    let w = weights(&DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 2.0, 3.0, 1.0, 0.0]));
    let draws = sample_posterior(
        &panel,
        &w,
        Deterministic::Constant,
        &NgPrior::default(),
        &small_schedule(1000, 300),
        9,
        &StackOptions::default(),
    )
    .unwrap();
    let mut agree = 0;
    for d in &draws.draws {
        let oracle = oracle_moduli(&d.solved.f)[0];
        if (oracle < 1.0) == d.is_stable() {
            agree += 1;
        } else {
            assert!((oracle - 1.0).abs() < 1e-9, "disagreement away from the boundary: {oracle}");
        }
    }
    assert_eq!(agree, 1000);
    let n_stable = draws.n_stable();
    assert!(n_stable > 0 && n_stable < 1000, "expected a mix of stable and unstable draws, got {n_stable}");
    assert_eq!(filter_stable(&draws).unwrap().len(), n_stable);
}

#[test]
fn unit_root_draw_is_unstable() {
    let layout = GlobalLayout::new(vec!["a".into(), "b".into()], vec!["x".into()]).unwrap();
    let w = weights(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    let w = bgvar_core::weights::build_weights(
        &["a".to_string(), "b".to_string()],
        w.matrix(),
        bgvar_core::weights::WeightMode::RowStochastic,
    )
    .unwrap();
    let links: Vec<_> = ["a", "b"].iter().map(|c| bgvar_core::gvar::build_link(&layout, c, &w).unwrap()).collect();
    let country = |psi: f64| CountryDraw {
        a0: DVector::zeros(1),
        a1: DVector::zeros(1),
        psi: DMatrix::from_element(1, 1, psi),
        lambda0: DMatrix::zeros(1, 1),
        lambda1: DMatrix::zeros(1, 1),
        sigma: DMatrix::identity(1, 1),
    };
    let d =
        assemble(&layout, Deterministic::Constant, &links, vec![country(1.0), country(0.5)], &StackOptions::default())
            .unwrap();
    assert_eq!(d.spectral_radius, 1.0);
    assert!(!d.is_stable());
    let d =
        assemble(&layout, Deterministic::Constant, &links, vec![country(0.9), country(0.5)], &StackOptions::default())
            .unwrap();
    assert!(d.is_stable());
}

#[test]
fn explosive_posterior_has_no_stable_draws() {
    let mut r = rng(4);
    let mut data = normal_matrix(&mut r, 100, 4) * 0.1;
    for t in 1..100 {
        for j in 0..4 {
            data[(t, j)] += 1.08 * data[(t - 1, j)] + 0.05;
        }
    }
    let panel = panel_from_global(&data, 2, 2);
    let w = weights(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    let draws = sample_posterior(
        &panel,
        &w,
        Deterministic::Constant,
        &NgPrior::default(),
        &small_schedule(100, 100),
        1,
        &StackOptions::default(),
    )
    .unwrap();
    assert_eq!(draws.n_stable(), 0);
    assert!(matches!(filter_stable(&draws), Err(BayesError::Analysis(_))));
}

#[test]
fn schedule_and_prior_are_validated() {
    let (_, panel, w) = planted_posterior(1, 100);
    let run = |s: Schedule, p: NgPrior| {
        sample_posterior(&panel, &w, Deterministic::Constant, &p, &s, 1, &StackOptions::default())
    };
    assert!(matches!(run(small_schedule(50, 10), NgPrior::default()), Err(BayesError::Config(_))));
    assert!(matches!(
        run(Schedule::default(), NgPrior { theta: -1.0, ..NgPrior::default() }),
        Err(BayesError::Config(_))
    ));
}
