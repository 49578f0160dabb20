//! Monte Carlo properties of the exact and randomized estimators.

mod common;

use common::*;
use kdep::bench::{convergence_medians, fit_rate, median, product_bound, ErrorKinds, ExactReference};
use kdep::hsic::{centered_maps, hsic, rhsic_cross_covariance};
use kdep::kernelcore::se_kernel_matrix;
use kdep::rff::{approx_gram, feature_map, sample_frequencies};
use kdep::DataMatrix;

const GRID: [usize; 4] = [16, 64, 256, 1024];

/// Σ_ab (H K_y H)_ab (K_x)_ba / n² with an explicit centering matrix.
fn naive_hsic(x: &DataMatrix, y: &DataMatrix, sx: f64, sy: f64) -> f64 {
    let n = x.n();
    let k = |m: &DataMatrix, s: f64, a: usize, b: usize| {
        let d2: f64 = m.row(a).iter().zip(m.row(b)).map(|(p, q)| (p - q) * (p - q)).sum();
        (-d2 / (2.0 * s * s)).exp()
    };
    let h = |a: usize, b: usize| if a == b { 1.0 - 1.0 / n as f64 } else { -1.0 / n as f64 };
    let mut hky = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            hky[a][b] = (0..n).map(|c| h(a, c) * k(y, sy, c, b)).sum();
        }
    }
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            let l: f64 = (0..n).map(|c| hky[a][c] * h(c, b)).sum();
            total += l * k(x, sx, b, a);
        }
    }
    total / (n * n) as f64
}

#[test]
fn exact_hsic_matches_index_sum_on_random_instances() {
    let mut r = rng(100);
    for trial in 0..40 {
        let n = 2 + trial % 18;
        let (dx, dy) = (1 + trial % 4, 1 + (trial / 4) % 4);
        let x = normal(n, dx, &mut r);
        let y = normal(n, dy, &mut r);
        let (sx, sy) = (0.5 + trial as f64 * 0.05, 1.7 - trial as f64 * 0.02);
        let fast = hsic(&x, &y, bw(sx), bw(sy)).unwrap().value;
        let slow = naive_hsic(&x, &y, sx, sy);
        assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1e-300), "trial {trial}: {fast} vs {slow}");
    }
}

#[test]
fn kernel_approximation_rate() {
    let mut r = rng(3);
    let x = uniform(30, 2, &mut r);
    let s = auto(&x);
    let exact = se_kernel_matrix(&x, s).values;
    let errs: Vec<f64> = GRID
        .iter()
        .map(|&d| {
            let per_seed: Vec<f64> = (0..10)
                .map(|seed| {
                    let w = sample_frequencies(2, d, s, seed).unwrap();
                    let k = approx_gram(&feature_map(&x, &w).unwrap()).values;
                    (&k - &exact).iter().fold(0.0f64, |m, v| m.max(v.abs()))
                })
                .collect();
            median(&per_seed)
        })
        .collect();
    let slope = fit_rate(&GRID, &errs).unwrap().slope;
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}");
}

#[test]
fn cross_covariance_larger_for_dependent_data() {
    let mut wins = 0;
    for seed in 0..100 {
        let mut r = rng(1000 + seed);
        let x = normal(10_000, 1, &mut r);
        let y = normal(10_000, 1, &mut r);
        let (zx, zy) = centered_maps(&x, &y, bw(1.0), bw(1.0), 32, seed).unwrap();
        let independent = rhsic_cross_covariance(&zx, &zy).unwrap().squared_frobenius();
        let (zx, zx2) = centered_maps(&x, &x, bw(1.0), bw(1.0), 32, seed).unwrap();
        let dependent = rhsic_cross_covariance(&zx, &zx2).unwrap().squared_frobenius();
        if dependent > independent {
            wins += 1;
        }
    }
    assert!(wins >= 95, "{wins}/100");
}

#[test]
fn randomized_statistic_converges_at_inverse_root_rate() {
    let mut r = rng(2);
    let x = uniform(100, 1, &mut r);
    let y = uniform(100, 1, &mut r);
    let reference = ExactReference::new(&x, &y, auto(&x), auto(&y)).unwrap();
    let summary = convergence_medians(&reference, &GRID, 10, 7, ErrorKinds::default()).unwrap();
    let rel: Vec<f64> = summary.iter().map(|g| g.statistic / reference.hsic).collect();
    assert!(rel[3] < rel[0], "{rel:?}");
    let slope = fit_rate(&GRID, &rel).unwrap().slope;
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}");
}

#[test]
fn product_error_rate_and_bound() {
    let mut r = rng(5);
    let x = uniform(30, 1, &mut r);
    let y = uniform(30, 1, &mut r);
    let reference = ExactReference::new(&x, &y, auto(&x), auto(&y)).unwrap();
    let kinds = ErrorKinds {
        sensitivity: false,
        product: true,
    };
    let summary = convergence_medians(&reference, &GRID, 10, 11, kinds).unwrap();
    let errs: Vec<f64> = summary.iter().map(|g| g.product.unwrap()).collect();
    for (&d, &e) in GRID.iter().zip(&errs) {
        assert!(e <= product_bound(30, d), "D = {d}: {e}");
    }
    let slope = fit_rate(&GRID, &errs).unwrap().slope;
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}");
}
