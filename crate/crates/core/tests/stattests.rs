use bgvar_core::stattests::{
    adf_test, granger_test, jarque_bera, johansen_trace, pp_test, stationarity_verdict, AdfOptions, CointDeterministic,
    StatTestError, StationarityVerdict,
};
use bgvar_core::Deterministic;
use bgvar_testkit::{normal, random_walk, rate, rng, size_band, white_noise};
use nalgebra::DMatrix;
use rand_distr::{Distribution, Exp};

fn adf(series: &[f64]) -> bool {
    adf_test(series, &AdfOptions::default()).unwrap().rejects(0.05)
}

fn pp(series: &[f64]) -> bool {
    pp_test(series, Deterministic::Constant).unwrap().rejects(0.05)
}

#[test]
fn unit_root_tests_size_and_power() {
    let walks: Vec<Vec<f64>> = (0..100).map(|s| random_walk(&mut rng(s), 200)).collect();
    let noise: Vec<Vec<f64>> = (0..100).map(|s| white_noise(&mut rng(10_000 + s), 200)).collect();

    let adf_walk: Vec<bool> = walks.iter().map(|w| adf(w)).collect();
    let pp_walk: Vec<bool> = walks.iter().map(|w| pp(w)).collect();
    assert!(adf_walk.iter().filter(|r| !**r).count() >= 90);
    assert!(noise.iter().filter(|n| adf(n)).count() >= 90);
    assert!(pp_walk.iter().filter(|r| !**r).count() >= 85);
    assert!(noise.iter().filter(|n| pp(n)).count() >= 90);
    let agree = adf_walk.iter().zip(&pp_walk).filter(|(a, b)| !**a && !**b).count();
    assert!(agree >= 85, "ADF and PP both fail to reject on {agree} of 100 walks");
}

#[test]
fn adf_size_control() {
    let reps = 500;
    let rejections: Vec<bool> = (0..reps).map(|s| adf(&random_walk(&mut rng(50_000 + s as u64), 200))).collect();
    let (lo, hi) = size_band(0.05, reps);
    let r = rate(&rejections);
    assert!(r >= lo && r <= hi, "ADF size {r} outside [{lo}, {hi}]");
}

#[test]
fn adf_is_scale_invariant() {
    for seed in 0..20 {
        let s = random_walk(&mut rng(seed), 120);
        let scaled: Vec<f64> = s.iter().map(|v| v * 37.5).collect();
        let a = adf_test(&s, &AdfOptions::default()).unwrap();
        let b = adf_test(&scaled, &AdfOptions::default()).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9);
    }
}

#[test]
fn trend_stationary_series_is_surfaced() {
    let mut r = rng(3);
    let s: Vec<f64> = (0..150).map(|t| 0.5 * t as f64 + 0.8 * normal(&mut r)).collect();
    let c = pp_test(&s, Deterministic::Constant).unwrap();
    let ct = pp_test(&s, Deterministic::ConstantTrend).unwrap();
    assert!(!c.rejects(0.05));
    assert!(ct.rejects(0.05));
    assert_eq!(stationarity_verdict(&c, &ct, 0.05), StationarityVerdict::TrendStationary);
}

#[test]
fn tests_are_bit_deterministic() {
    let s = random_walk(&mut rng(9), 80);
    let a = adf_test(&s, &AdfOptions::default()).unwrap();
    let b = adf_test(&s, &AdfOptions::default()).unwrap();
    assert_eq!(a.statistic.to_bits(), b.statistic.to_bits());
    assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
}

fn pair(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), 2, |r, c| if c == 0 { a[r] } else { b[r] })
}

#[test]
fn johansen_power_and_size() {
    let mut cointegrated = 0;
    let mut independent = 0;
    for seed in 0..100 {
        let mut r = rng(20_000 + seed);
        let y = random_walk(&mut r, 200);
        let z: Vec<f64> = y.iter().map(|v| v + normal(&mut r)).collect();
        let res = johansen_trace(&pair(&y, &z), 1, CointDeterministic::default()).unwrap();
        if res.rejects(0, 0.05) {
            cointegrated += 1;
        }
        let w = random_walk(&mut r, 200);
        let res = johansen_trace(&pair(&y, &w), 1, CointDeterministic::default()).unwrap();
        if !res.rejects(0, 0.05) {
            independent += 1;
        }
        assert!(res.trace_stats[0] > res.trace_stats[1]);
        assert!(res.selected_rank <= 2);
    }
    assert!(cointegrated >= 90, "r = 0 rejected for {cointegrated} cointegrated pairs");
    assert!(independent >= 85, "r = 0 retained for {independent} independent pairs");
}

#[test]
fn johansen_invariant_to_series_order() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let a = random_walk(&mut r, 150);
        let b: Vec<f64> = a.iter().map(|v| 0.5 * v + normal(&mut r)).collect();
        for det in
            [CointDeterministic::RestrictedConstant, CointDeterministic::Constant, CointDeterministic::ConstantTrend]
        {
            let x = johansen_trace(&pair(&a, &b), 2, det).unwrap();
            let y = johansen_trace(&pair(&b, &a), 2, det).unwrap();
            for (s, t) in x.trace_stats.iter().zip(&y.trace_stats) {
                assert!((s - t).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn granger_power_size_and_invariance() {
    let mut power = 0;
    for seed in 0..100 {
        let mut r = rng(30_000 + seed);
        let cause = white_noise(&mut r, 200);
        let effect: Vec<f64> =
            (0..200).map(|t| if t == 0 { normal(&mut r) } else { 0.8 * cause[t - 1] + normal(&mut r) }).collect();
        if granger_test(&cause, &effect, 1).unwrap().rejects(0.01) {
            power += 1;
        }
    }
    assert!(power >= 95);

    let reps = 500;
    let rejections: Vec<bool> = (0..reps)
        .map(|s| {
            let mut r = rng(40_000 + s as u64);
            let a = white_noise(&mut r, 200);
            let b = white_noise(&mut r, 200);
            granger_test(&a, &b, 1).unwrap().rejects(0.05)
        })
        .collect();
    let r = rate(&rejections);
    assert!((0.01..=0.10).contains(&r), "Granger size {r}");
    let (lo, hi) = size_band(0.05, reps);
    assert!(r >= lo && r <= hi);

    let mut g = rng(5);
    let a = white_noise(&mut g, 100);
    let b: Vec<f64> = (0..100).map(|t| if t == 0 { 0.0 } else { 0.3 * a[t - 1] } + normal(&mut g)).collect();
    let base = granger_test(&a, &b, 2).unwrap().statistic;
    let a2: Vec<f64> = a.iter().map(|v| 4.0 * v - 7.0).collect();
    let b2: Vec<f64> = b.iter().map(|v| -0.25 * v + 100.0).collect();
    assert!((granger_test(&a2, &b2, 2).unwrap().statistic - base).abs() < 1e-9);
}

#[test]
fn granger_needs_enough_observations() {
    let a = [0.1, 0.5, -0.2, 0.3, 0.9, -1.0];
    assert!(matches!(granger_test(&a, &a, 3), Err(StatTestError::InsufficientData { .. })));
}

#[test]
fn jarque_bera_size_and_power() {
    let normal_ok =
        (0..100).filter(|&s| !jarque_bera(&white_noise(&mut rng(60_000 + s), 1000)).unwrap().rejects(0.05)).count();
    assert!(normal_ok >= 90);
    let exp = Exp::new(1.0).unwrap();
    for seed in 0..20 {
        let mut r = rng(70_000 + seed);
        let xs: Vec<f64> = (0..1000).map(|_| exp.sample(&mut r)).collect();
        assert!(jarque_bera(&xs).unwrap().rejects(0.01));
    }
}
