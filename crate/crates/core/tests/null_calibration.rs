//! Calibration of the permutation and gamma nulls.

mod common;

use common::*;
use kdep::bench::median;
use kdep::hsic::{hsic, Estimator};
use kdep::nulltest::{
    gamma_null, independence_test, ks_distance_gamma, ks_two_sample, permutation_null, threshold, NullModel,
    TestConfig,
};

fn draws(null: &NullModel) -> &[f64] {
    match null {
        NullModel::Permutation { samples } => samples,
        NullModel::Gamma { .. } => panic!("expected permutation draws"),
    }
}

#[test]
fn permutation_test_rejection_rate_for_independent_uniforms() {
    let mut rejections = 0;
    for trial in 0..500u64 {
        let mut r = rng(trial);
        let x = uniform(100, 1, &mut r);
        let y = uniform(100, 1, &mut r);
        let config = TestConfig {
            permutations: 199,
            seed: trial,
            ..TestConfig::default()
        };
        let result = independence_test(&x, &y, auto(&x), auto(&y), &config).unwrap();
        assert!(result.p_value > 0.0 && result.p_value <= 1.0);
        if result.reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 500.0;
    assert!((0.03..=0.07).contains(&rate), "rate {rate}");
}

#[test]
fn null_mean_matches_redraw_mean() {
    for normal_data in [false, true] {
        let mut redraws = Vec::new();
        for trial in 0..500u64 {
            let mut r = rng(50_000 + trial);
            let (x, y) = if normal_data {
                (normal(100, 1, &mut r), normal(100, 1, &mut r))
            } else {
                (uniform(100, 1, &mut r), uniform(100, 1, &mut r))
            };
            redraws.push(hsic(&x, &y, auto(&x), auto(&y)).unwrap().value);
        }
        let redraw_mean = redraws.iter().sum::<f64>() / redraws.len() as f64;
        let mut r = rng(9);
        let (x, y) = if normal_data {
            (normal(100, 1, &mut r), normal(100, 1, &mut r))
        } else {
            (uniform(100, 1, &mut r), uniform(100, 1, &mut r))
        };
        let null = permutation_null(&x, &y, auto(&x), auto(&y), Estimator::Exact, 500, 4, false).unwrap();
        let s = draws(&null);
        let null_mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!(
            (null_mean - redraw_mean).abs() <= 0.2 * redraw_mean,
            "null {null_mean} redraw {redraw_mean}"
        );
    }
}

#[test]
fn gamma_agrees_with_permutation_null() {
    let mut r = rng(21);
    let x = normal(100, 1, &mut r);
    let y = normal(100, 1, &mut r);
    let null = permutation_null(&x, &y, auto(&x), auto(&y), Estimator::Exact, 2000, 21, false).unwrap();
    let gamma = gamma_null(&null).unwrap();
    let (tp, tg) = (threshold(&null, 0.05).unwrap(), threshold(&gamma, 0.05).unwrap());
    assert!((tg - tp).abs() <= 0.1 * tp, "{tg} vs {tp}");
    let NullModel::Gamma { shape, scale, .. } = gamma else {
        unreachable!()
    };
    let mean = draws(&null).iter().sum::<f64>() / 2000.0;
    assert!((shape * scale - mean).abs() <= 1e-10 * mean);
    let ks = ks_distance_gamma(draws(&null), shape, scale).unwrap();
    assert!(ks <= 0.05, "ks {ks}");
}

#[test]
fn randomized_null_approaches_exact_null() {
    let grid = [4usize, 16, 64, 256];
    let mut medians = Vec::new();
    for &features in &grid {
        let mut per_seed = Vec::new();
        for seed in 0..10u64 {
            let mut r = rng(700 + seed);
            let x = normal(60, 1, &mut r);
            let y = normal(60, 1, &mut r);
            let (sx, sy) = (auto(&x), auto(&y));
            let exact = permutation_null(&x, &y, sx, sy, Estimator::Exact, 300, seed, false).unwrap();
            let approx = permutation_null(&x, &y, sx, sy, Estimator::Randomized { features }, 300, seed, false).unwrap();
            per_seed.push(ks_two_sample(draws(&exact), draws(&approx)));
        }
        medians.push(median(&per_seed));
    }
    // nonincreasing up to Monte Carlo noise of a 300-draw two-sample KS
    for w in medians.windows(2) {
        assert!(w[1] <= w[0] + 0.05, "{medians:?}");
    }
    assert!(medians[3] < medians[0], "{medians:?}");
}
