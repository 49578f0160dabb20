//! Independence tests: permutation nulls, a moment-matched gamma null,
//! thresholds at level α, and p-values.
//!
//! Null draws permute the rows of `Y` while `X` stays fixed. Each permutation
//! has its own seed-derived generator, so the draws do not depend on how many
//! threads evaluate them. For RHSIC the frequency matrices are sampled once
//! from the test seed and reused for every permutation unless
//! `redraw_frequencies` is set.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use statrs::function::gamma::{checked_gamma_lr, checked_gamma_ur};

use crate::error::{Error, Result};
use crate::hsic::{check_rows, centered_maps, rhsic, statistic, DependenceStatistic, Estimator};
use crate::kernelcore::{center_gram, se_kernel_matrix, Bandwidth, DataMatrix};
use crate::seeding::{derive_seed, domain, indexed_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullKind {
    Permutation,
    GammaMomentMatched,
}

/// Distribution of the statistic under independence.
#[derive(Debug, Clone, PartialEq)]
pub enum NullModel {
    /// Statistic values after permuting `Y`.
    Permutation { samples: Vec<f64> },
    /// Gamma with `shape · scale` equal to the mean of the draws it was fitted to.
    Gamma {
        shape: f64,
        scale: f64,
        permutations: usize,
    },
}

impl NullModel {
    pub fn kind(&self) -> NullKind {
        match self {
            NullModel::Permutation { .. } => NullKind::Permutation,
            NullModel::Gamma { .. } => NullKind::GammaMomentMatched,
        }
    }

    pub fn permutations(&self) -> usize {
        match self {
            NullModel::Permutation { samples } => samples.len(),
            NullModel::Gamma { permutations, .. } => *permutations,
        }
    }
}

/// Outcome of an independence test.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceResult {
    pub statistic: DependenceStatistic,
    pub p_value: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub null: NullModel,
    pub reject: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    pub estimator: Estimator,
    pub alpha: f64,
    pub null: NullKind,
    pub permutations: usize,
    pub seed: u64,
    pub redraw_frequencies: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Exact,
            alpha: 0.05,
            null: NullKind::Permutation,
            permutations: 2000,
            seed: 0,
            redraw_frequencies: false,
        }
    }
}

/// The `index`-th null permutation of `0..n`. Never the identity when `n ≥ 2`.
pub fn null_permutation(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = indexed_rng(seed, domain::PERMUTATIONS, index);
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        perm.shuffle(&mut rng);
        if n < 2 || perm.iter().enumerate().any(|(i, &p)| i != p) {
            return perm;
        }
    }
}

/// `(1/n²) Σ_ij A_ij B_{π(i)π(j)}`.
fn permuted_inner(a: &Array2<f64>, b: &Array2<f64>, perm: &[usize]) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for (i, &pi) in perm.iter().enumerate() {
        let arow = a.row(i);
        let brow = b.row(pi);
        for j in 0..n {
            acc += arow[j] * brow[perm[j]];
        }
    }
    acc / (n * n) as f64
}

/// Draws `permutations` null statistics by permuting the rows of `y`.
pub fn permutation_null(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
    estimator: Estimator,
    permutations: usize,
    seed: u64,
    redraw_frequencies: bool,
) -> Result<NullModel> {
    let n = check_rows(x, y)?;
    if permutations == 0 {
        return Err(Error::InvalidParameter("at least one permutation is required".into()));
    }
    let samples: Vec<f64> = match estimator {
        Estimator::Exact => {
            let kx = center_gram(&se_kernel_matrix(x, sigma_x)).values;
            let ky = center_gram(&se_kernel_matrix(y, sigma_y)).values;
            (0..permutations as u64)
                .into_par_iter()
                .map(|b| permuted_inner(&kx, &ky, &null_permutation(n, seed, b)))
                .collect()
        }
        Estimator::Randomized { features } if !redraw_frequencies => {
            let (zx, zy) = centered_maps(x, y, sigma_x, sigma_y, features, seed)?;
            (0..permutations as u64)
                .into_par_iter()
                .map(|b| {
                    let perm = null_permutation(n, seed, b);
                    rhsic(&zx, &zy.permute_rows(&perm)).map(|s| s.value)
                })
                .collect::<Result<_>>()?
        }
        Estimator::Randomized { features } => {
            let base = derive_seed(seed, domain::PERMUTATION_FREQUENCIES);
            (0..permutations as u64)
                .into_par_iter()
                .map(|b| {
                    let perm = null_permutation(n, seed, b);
                    let (zx, zy) =
                        centered_maps(x, &y.permute_rows(&perm), sigma_x, sigma_y, features, derive_seed(base, b))?;
                    rhsic(&zx, &zy).map(|s| s.value)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(NullModel::Permutation { samples })
}

/// Fits a gamma distribution to permutation draws by matching mean and
/// (unbiased) variance: `shape = m²/v`, `scale = v/m`.
pub fn gamma_null(draws: &NullModel) -> Result<NullModel> {
    let NullModel::Permutation { samples } = draws else {
        return Err(Error::InvalidParameter("gamma fit needs permutation draws".into()));
    };
    let first = samples.first().copied().unwrap_or(0.0);
    if samples.len() < 2 || samples.iter().all(|&s| s == first) {
        return Err(Error::DegenerateNull("fewer than two distinct null draws".into()));
    }
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1.0);
    if !(mean > 0.0) || !(var > 0.0) {
        return Err(Error::DegenerateNull(format!("null mean {mean}, variance {var}")));
    }
    Ok(NullModel::Gamma {
        shape: mean * mean / var,
        scale: var / mean,
        permutations: samples.len(),
    })
}

fn check_gamma(shape: f64, scale: f64) -> Result<()> {
    if shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateNull(format!("gamma shape {shape}, scale {scale}")))
    }
}

/// Gamma CDF `P(shape, x/scale)`.
pub fn gamma_cdf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    check_gamma(shape, scale)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    checked_gamma_lr(shape, x / scale).map_err(|e| Error::DegenerateNull(e.to_string()))
}

/// Gamma survival function `Q(shape, x/scale)`.
pub fn gamma_sf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    check_gamma(shape, scale)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    checked_gamma_ur(shape, x / scale).map_err(|e| Error::DegenerateNull(e.to_string()))
}

/// Inverse gamma CDF by bisection on the regularized lower incomplete gamma
/// function, to an absolute tolerance of 1e-12 (or the float spacing of the
/// bracket, whichever is larger).
pub fn gamma_quantile(p: f64, shape: f64, scale: f64) -> Result<f64> {
    check_gamma(shape, scale)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {p} outside (0, 1)")));
    }
    let mut lo = 0.0f64;
    let mut hi = shape * scale;
    while gamma_cdf(hi, shape, scale)? < p {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12f64.max(4.0 * f64::EPSILON * hi) {
        let mid = 0.5 * (lo + hi);
        if gamma_cdf(mid, shape, scale)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Critical value θ at level `alpha`.
///
/// Permutation nulls use the `⌈(1−α)(B+1)⌉`-th smallest draw; gamma nulls use
/// the `1−α` quantile.
pub fn threshold(null: &NullModel, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    match null {
        NullModel::Permutation { samples } => {
            let b = samples.len();
            if b == 0 {
                return Err(Error::DegenerateNull("no null draws".into()));
            }
            let rank = ((1.0 - alpha) * (b + 1) as f64 - 1e-9).ceil() as usize;
            if rank > b {
                return Err(Error::TooFewPermutations {
                    permutations: b,
                    alpha,
                    needed: (1.0 / alpha).ceil() as usize - 1,
                });
            }
            let mut sorted = samples.clone();
            sorted.sort_by(f64::total_cmp);
            Ok(sorted[rank.max(1) - 1])
        }
        NullModel::Gamma { shape, scale, .. } => gamma_quantile(1.0 - alpha, *shape, *scale),
    }
}

/// Probability under the null of a statistic at least as large as `stat`.
///
/// Permutation: `(1 + #{draws ≥ stat}) / (B + 1)`, never zero.
pub fn p_value(stat: f64, null: &NullModel) -> Result<f64> {
    match null {
        NullModel::Permutation { samples } => {
            if samples.is_empty() {
                return Err(Error::DegenerateNull("no null draws".into()));
            }
            let exceed = samples.iter().filter(|&&s| s >= stat).count();
            Ok((1 + exceed) as f64 / (samples.len() + 1) as f64)
        }
        NullModel::Gamma { shape, scale, .. } => gamma_sf(stat, *shape, *scale),
    }
}

/// Runs statistic, null, threshold, and p-value.
///
/// For permutation nulls the decision is `p ≤ α`, which coincides with
/// `stat ≥ θ` except when the statistic ties the critical draw exactly.
pub fn independence_test(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
    config: &TestConfig,
) -> Result<DependenceResult> {
    check_alpha(config.alpha)?;
    let stat = statistic(x, y, sigma_x, sigma_y, config.estimator, config.seed)?;
    let draws = permutation_null(
        x,
        y,
        sigma_x,
        sigma_y,
        config.estimator,
        config.permutations,
        config.seed,
        config.redraw_frequencies,
    )?;
    let null = match config.null {
        NullKind::Permutation => draws,
        NullKind::GammaMomentMatched => gamma_null(&draws)?,
    };
    let theta = threshold(&null, config.alpha)?;
    let p = p_value(stat.value, &null)?;
    let reject = match null.kind() {
        NullKind::Permutation => p <= config.alpha,
        NullKind::GammaMomentMatched => stat.value >= theta,
    };
    Ok(DependenceResult {
        statistic: stat,
        p_value: p,
        threshold: theta,
        alpha: config.alpha,
        null,
        reject,
    })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and a
/// gamma CDF.
pub fn ks_distance_gamma(samples: &[f64], shape: f64, scale: f64) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let f = gamma_cdf(sorted[i], shape, scale)?;
        worst = worst.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    Ok(worst)
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}
