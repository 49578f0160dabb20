//! Convergence and runtime measurements for the randomized estimator.
//!
//! Product errors are reported unnormalized: `‖K̂ₓK̂_y − KₓK_y‖₂` on centered
//! `n × n` Gram matrices, the scale on which the approximation bound
//! `√(3n⁴ log n / D) + 2n² log n / D` is stated.

use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hsic::{centered_maps, check_rows, hsic_from_centered, rhsic};
use crate::kernelcore::{center_gram, se_kernel_matrix, Bandwidth, DataMatrix, GramMatrix};
use crate::rff::{approx_gram, center_features, feature_map, sample_frequency_pair, FeatureMap};
use crate::seeding::derive_seed;
use crate::sensmap::{hsic_sensitivity, rhsic_sensitivity, SensitivityMap};

pub const SPECTRAL_TOLERANCE: f64 = 1e-8;
pub const SPECTRAL_MAX_ITERATIONS: usize = 20_000;

/// Largest singular value of `a` by power iteration on `aᵀa`, stopping when
/// successive estimates agree to relative tolerance `tol`.
pub fn spectral_norm(a: &Array2<f64>, tol: f64, max_iterations: usize) -> Result<f64> {
    let m = a.ncols();
    if m == 0 || a.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    // a fixed random start avoids being orthogonal to the top singular vector
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Array1<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    v /= v.dot(&v).sqrt();
    let mut estimate = 0.0;
    for _ in 0..max_iterations {
        let av = a.dot(&v);
        let next = av.dot(&av).sqrt();
        let w = a.t().dot(&av);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return Ok(next);
        }
        v = w / norm;
        if (next - estimate).abs() <= tol * next {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::PowerIterationNoConvergence(max_iterations))
}

/// `√(3n⁴ log n / D) + 2n² log n / D`.
pub fn product_bound(n: usize, features: usize) -> f64 {
    let n = n as f64;
    let d = features as f64;
    let ln = n.ln();
    (3.0 * n.powi(4) * ln / d).sqrt() + 2.0 * n * n * ln / d
}

/// `‖K̂ₓK̂_y − KₓK_y‖₂` for given exact and approximate centered Grams.
pub fn product_error_from_grams(kx: &GramMatrix, ky: &GramMatrix, approx_x: &GramMatrix, approx_y: &GramMatrix) -> Result<f64> {
    let diff = approx_x.values.dot(&approx_y.values) - kx.values.dot(&ky.values);
    spectral_norm(&diff, SPECTRAL_TOLERANCE, SPECTRAL_MAX_ITERATIONS)
}

/// Product error with `D` features per variable drawn from `seed`.
pub fn product_error(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
    features: usize,
    seed: u64,
) -> Result<f64> {
    let reference = ExactReference::new(x, y, sigma_x, sigma_y)?;
    let (zx, zy) = centered_maps(x, y, sigma_x, sigma_y, features, seed)?;
    product_error_from_grams(&reference.kx, &reference.ky, &approx_gram(&zx), &approx_gram(&zy))
}

/// Least-squares line through `(log D, log error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub grid: Vec<usize>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_rate(grid: &[usize], errors: &[f64]) -> Result<RateFit> {
    if grid.len() != errors.len() {
        return Err(Error::ShapeMismatch(format!("{} grid points, {} errors", grid.len(), errors.len())));
    }
    if grid.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            got: grid.len(),
        });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::InvalidParameter(format!("grid must be positive and strictly increasing: {grid:?}")));
    }
    if let Some(&bad) = errors.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::NonPositiveError(bad));
    }
    let lx: Vec<f64> = grid.iter().map(|&d| (d as f64).ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        grid: grid.to_vec(),
        errors: errors.to_vec(),
        slope,
        intercept: my - slope * mx,
    })
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

/// Exact quantities the randomized ones are compared against.
#[derive(Debug, Clone)]
pub struct ExactReference {
    pub x: DataMatrix,
    pub y: DataMatrix,
    pub sigma_x: Bandwidth,
    pub sigma_y: Bandwidth,
    pub kx: GramMatrix,
    pub ky: GramMatrix,
    pub hsic: f64,
}

/// Errors of one randomized draw against the exact reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximationErrors {
    pub rhsic: f64,
    pub statistic: f64,
    pub sensitivity: Option<f64>,
    pub product: Option<f64>,
}

/// Which errors [`ExactReference::errors`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorKinds {
    pub sensitivity: bool,
    pub product: bool,
}

impl ExactReference {
    pub fn new(x: &DataMatrix, y: &DataMatrix, sigma_x: Bandwidth, sigma_y: Bandwidth) -> Result<Self> {
        check_rows(x, y)?;
        let kx = center_gram(&se_kernel_matrix(x, sigma_x));
        let ky = center_gram(&se_kernel_matrix(y, sigma_y));
        let hsic = hsic_from_centered(&kx, &ky);
        Ok(Self {
            x: x.clone(),
            y: y.clone(),
            sigma_x,
            sigma_y,
            kx,
            ky,
            hsic,
        })
    }

    pub fn sensitivity(&self) -> Result<SensitivityMap> {
        hsic_sensitivity(&self.x, &self.y, self.sigma_x, self.sigma_y)
    }

    fn maps(&self, features: usize, seed: u64) -> Result<(FeatureMap, FeatureMap)> {
        let (wx, wy) = sample_frequency_pair(
            (self.x.d(), self.y.d()),
            (features, features),
            (self.sigma_x, self.sigma_y),
            seed,
        )?;
        Ok((
            center_features(&feature_map(&self.x, &wx)?)?,
            center_features(&feature_map(&self.y, &wy)?)?,
        ))
    }

    /// Errors of the `D`-feature approximation drawn from `seed`.
    /// `exact_map` is required when sensitivity errors are requested.
    pub fn errors(
        &self,
        features: usize,
        seed: u64,
        kinds: ErrorKinds,
        exact_map: Option<&SensitivityMap>,
    ) -> Result<ApproximationErrors> {
        let (zx, zy) = self.maps(features, seed)?;
        let value = rhsic(&zx, &zy)?.value;
        let sensitivity = if kinds.sensitivity {
            let exact = exact_map.ok_or_else(|| Error::InvalidParameter("exact sensitivity map missing".into()))?;
            Some(rhsic_sensitivity(&self.x, &self.y, &zx, &zy)?.frobenius_distance(exact))
        } else {
            None
        };
        let product = if kinds.product {
            Some(product_error_from_grams(&self.kx, &self.ky, &approx_gram(&zx), &approx_gram(&zy))?)
        } else {
            None
        };
        Ok(ApproximationErrors {
            rhsic: value,
            statistic: (value - self.hsic).abs(),
            sensitivity,
            product,
        })
    }
}

/// Medians over seeds at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSummary {
    pub features: usize,
    pub statistic: f64,
    pub sensitivity: Option<f64>,
    pub product: Option<f64>,
}

/// Seed of repetition `rep`; shared across grid points.
pub fn repetition_seed(root: u64, rep: usize) -> u64 {
    derive_seed(root, rep as u64)
}

/// Median errors over `reps` seeds at every grid point, repetitions in
/// parallel.
pub fn convergence_medians(
    reference: &ExactReference,
    grid: &[usize],
    reps: usize,
    root_seed: u64,
    kinds: ErrorKinds,
) -> Result<Vec<GridSummary>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let exact_map = if kinds.sensitivity {
        Some(reference.sensitivity()?)
    } else {
        None
    };
    grid.iter()
        .map(|&features| {
            let runs = (0..reps)
                .into_par_iter()
                .map(|r| reference.errors(features, repetition_seed(root_seed, r), kinds, exact_map.as_ref()))
                .collect::<Result<Vec<_>>>()?;
            let pick = |f: fn(&ApproximationErrors) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = runs.iter().map(f).collect();
                vals.map(|v| median(&v))
            };
            Ok(GridSummary {
                features,
                statistic: median(&runs.iter().map(|e| e.statistic).collect::<Vec<_>>()),
                sensitivity: pick(|e| e.sensitivity),
                product: pick(|e| e.product),
            })
        })
        .collect()
}

/// Minimum wall time in seconds of `reps` runs of `f`.
pub fn min_wall_time<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = f()?;
        best = best.min(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((best, last.expect("at least one run")))
}
