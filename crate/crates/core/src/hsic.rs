//! Exact and randomized Hilbert-Schmidt independence criteria.
//!
//! `hsic` evaluates `(1/n²) Tr(K_x H K_y H)` as the elementwise product-sum of
//! the two centered Gram matrices, so either argument being constant yields
//! exactly zero and the statistic is exactly symmetric in its arguments.
//!
//! `rhsic` works on centered random-feature maps. With `Z = C + iS` the
//! randomized cross-covariance is `Ĉ = Z̃ₓᴴ Z̃_y = P + iQ`, where
//!
//! ```text
//! P = C̃ₓᵀ C̃_y + S̃ₓᵀ S̃_y        Q = C̃ₓᵀ S̃_y − S̃ₓᵀ C̃_y
//! ```
//!
//! and the statistic is `(‖P‖²_F + ‖Q‖²_F) / n²`. No `n × n` matrix is formed.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kernelcore::{center_gram, se_kernel_matrix, Bandwidth, BandwidthSpec, DataMatrix, GramMatrix};
use crate::rff::{center_features, feature_map, sample_frequency_pair, FeatureMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hsic,
    Rhsic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hsic => "hsic",
            Method::Rhsic => "rhsic",
        }
    }
}

/// Which estimator to run, with the feature count for the randomized one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Exact,
    Randomized { features: usize },
}

impl Estimator {
    pub fn method(&self) -> Method {
        match self {
            Estimator::Exact => Method::Hsic,
            Estimator::Randomized { .. } => Method::Rhsic,
        }
    }

    pub fn features(&self) -> Option<usize> {
        match self {
            Estimator::Exact => None,
            Estimator::Randomized { features } => Some(*features),
        }
    }
}

/// A dependence statistic together with how it was computed.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceStatistic {
    /// Raw value. May be a hair below zero from round-off.
    pub value: f64,
    pub method: Method,
    pub n: usize,
    pub features: Option<usize>,
    pub sigma_x: Bandwidth,
    pub sigma_y: Bandwidth,
}

impl DependenceStatistic {
    /// Value clamped at zero for reporting.
    pub fn reported(&self) -> f64 {
        self.value.max(0.0)
    }
}

/// The complex randomized cross-covariance `Ĉ = P + iQ` (`D_x × D_y`).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCovariance {
    pub real: Array2<f64>,
    pub imag: Array2<f64>,
}

impl CrossCovariance {
    pub fn squared_frobenius(&self) -> f64 {
        let re: f64 = self.real.iter().map(|v| v * v).sum();
        let im: f64 = self.imag.iter().map(|v| v * v).sum();
        re + im
    }
}

pub(crate) fn check_rows(x: &DataMatrix, y: &DataMatrix) -> Result<usize> {
    if x.n() != y.n() {
        return Err(Error::RowCountMismatch(x.n(), y.n()));
    }
    if x.n() < 2 {
        return Err(Error::TooFewSamples { required: 2, got: x.n() });
    }
    Ok(x.n())
}

/// `(1/n²) Σ_ij A_ij B_ij` in row-major order.
pub(crate) fn frobenius_inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows() as f64;
    a.iter().zip(b.iter()).map(|(p, q)| p * q).sum::<f64>() / (n * n)
}

/// Exact HSIC with SE kernels at the given bandwidths.
pub fn hsic(x: &DataMatrix, y: &DataMatrix, sigma_x: Bandwidth, sigma_y: Bandwidth) -> Result<DependenceStatistic> {
    let n = check_rows(x, y)?;
    let kx = center_gram(&se_kernel_matrix(x, sigma_x));
    let ky = center_gram(&se_kernel_matrix(y, sigma_y));
    Ok(DependenceStatistic {
        value: hsic_from_centered(&kx, &ky),
        method: Method::Hsic,
        n,
        features: None,
        sigma_x,
        sigma_y,
    })
}

/// `(1/n²) Tr(K̃_x K̃_y)` for two centered Gram matrices.
pub fn hsic_from_centered(kx: &GramMatrix, ky: &GramMatrix) -> f64 {
    debug_assert!(kx.centered && ky.centered);
    frobenius_inner(&kx.values, &ky.values)
}

/// HSIC with bandwidths chosen per variable from `spec`.
pub fn hsic_auto(x: &DataMatrix, y: &DataMatrix, spec: BandwidthSpec) -> Result<DependenceStatistic> {
    check_rows(x, y)?;
    hsic(x, y, spec.resolve(x)?, spec.resolve(y)?)
}

fn require_centered_pair(zx: &FeatureMap, zy: &FeatureMap) -> Result<usize> {
    if !zx.centered || !zy.centered {
        return Err(Error::NotCentered);
    }
    if zx.n() != zy.n() {
        return Err(Error::RowCountMismatch(zx.n(), zy.n()));
    }
    Ok(zx.n())
}

/// `Ĉ = Z̃ₓᴴ Z̃_y` from two centered feature maps, in `O(n·D_x·D_y)`.
pub fn rhsic_cross_covariance(zx: &FeatureMap, zy: &FeatureMap) -> Result<CrossCovariance> {
    require_centered_pair(zx, zy)?;
    let cc = zx.cos.t().dot(&zy.cos);
    let ss = zx.sin.t().dot(&zy.sin);
    let cs = zx.cos.t().dot(&zy.sin);
    let sc = zx.sin.t().dot(&zy.cos);
    Ok(CrossCovariance {
        real: cc + ss,
        imag: cs - sc,
    })
}

/// Randomized HSIC `(1/n²)‖Ĉ‖²_F`.
pub fn rhsic(zx: &FeatureMap, zy: &FeatureMap) -> Result<DependenceStatistic> {
    let n = require_centered_pair(zx, zy)?;
    let c = rhsic_cross_covariance(zx, zy)?;
    let nf = n as f64;
    Ok(DependenceStatistic {
        value: c.squared_frobenius() / (nf * nf),
        method: Method::Rhsic,
        n,
        features: Some(zx.features().min(zy.features())),
        sigma_x: zx.frequencies.sigma,
        sigma_y: zy.frequencies.sigma,
    })
}

/// Centered feature maps for a pair of variables, with frequencies drawn from
/// the sub-streams of `seed`.
pub fn centered_maps(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
    features: usize,
    seed: u64,
) -> Result<(FeatureMap, FeatureMap)> {
    check_rows(x, y)?;
    let (wx, wy) = sample_frequency_pair((x.d(), y.d()), (features, features), (sigma_x, sigma_y), seed)?;
    let zx = center_features(&feature_map(x, &wx)?)?;
    let zy = center_features(&feature_map(y, &wy)?)?;
    Ok((zx, zy))
}

/// Randomized HSIC straight from data: sample frequencies, map, center, reduce.
pub fn rhsic_from_data(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
    features: usize,
    seed: u64,
) -> Result<DependenceStatistic> {
    let (zx, zy) = centered_maps(x, y, sigma_x, sigma_y, features, seed)?;
    rhsic(&zx, &zy)
}

/// Runs whichever estimator is requested. `seed` only matters for RHSIC.
pub fn statistic(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
    estimator: Estimator,
    seed: u64,
) -> Result<DependenceStatistic> {
    match estimator {
        Estimator::Exact => hsic(x, y, sigma_x, sigma_y),
        Estimator::Randomized { features } => rhsic_from_data(x, y, sigma_x, sigma_y, features, seed),
    }
}
