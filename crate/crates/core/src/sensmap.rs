//! Sensitivity maps: the gradient of HSIC or RHSIC with respect to every
//! entry of the input matrices.
//!
//! For the exact statistic `f = (1/n²) Σ_ab (K_x)_ab L_ab` with
//! `L = H K_y H` held fixed, differentiating the SE kernel gives
//!
//! ```text
//! ∂f/∂X_ij = −(2 / (σ_x² n²)) Σ_k L_ik (K_x)_ik (X_ij − X_kj)
//! ```
//!
//! The `Y` block is the same expression with roles swapped.
//!
//! For the randomized statistic `f = (‖P‖² + ‖Q‖²)/n²` (see [`crate::hsic`]),
//! a change in row `i` of `X` moves only row `i` of the raw map, and the
//! centering of that perturbation drops out against the centered `Y` map.
//! With `u = P c̃_i + Q s̃_i` and `v = P s̃_i − Q c̃_i` built from row `i` of
//! the centered `Y` parts,
//!
//! ```text
//! ∂f/∂X_ij = (2/n²) Σ_k W_jk (−sin_ik u_k + cos_ik v_k)
//! ```
//!
//! where `cos`/`sin` are the uncentered parts of the `X` map. The `Y` block
//! uses `(Pᵀ, −Qᵀ)` in place of `(P, Q)`.

use ndarray::{concatenate, Array2, Axis};

use crate::error::{Error, Result};
use crate::hsic::{check_rows, rhsic_cross_covariance, Method};
use crate::kernelcore::{center_gram, se_kernel_matrix, Bandwidth, DataMatrix, GramMatrix};
use crate::rff::{feature_map, FeatureMap};

/// Gradient of a dependence statistic with respect to both inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMap {
    /// `∂stat/∂X_ij`, `n × d_x`.
    pub sx: Array2<f64>,
    /// `∂stat/∂Y_ij`, `n × d_y`.
    pub sy: Array2<f64>,
    pub method: Method,
}

impl SensitivityMap {
    pub fn n(&self) -> usize {
        self.sx.nrows()
    }

    /// The total map `[Sx, Sy]`, `n × (d_x + d_y)`.
    pub fn total(&self) -> Array2<f64> {
        concatenate(Axis(1), &[self.sx.view(), self.sy.view()]).expect("blocks share the row count")
    }

    /// Frobenius norm of the difference of two total maps.
    pub fn frobenius_distance(&self, other: &SensitivityMap) -> f64 {
        let a = self.total();
        let b = other.total();
        a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    }
}

/// Per-sample and per-feature summaries of a sensitivity map.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityAggregate {
    /// `(1/d) Σ_j S_ij²` with `d = d_x + d_y`.
    pub per_sample: Vec<f64>,
    /// `(1/n) Σ_i S_ij²` over the concatenated columns.
    pub per_feature: Vec<f64>,
    /// `‖S_i‖` over the concatenated row.
    pub sample_norms: Vec<f64>,
    /// `‖S^x_i‖` over the `X` block only.
    pub sample_norms_x: Vec<f64>,
}

/// One block of the exact map: `−(2/(σ²n²)) Σ_k M_ik (D_ij − D_kj)` with
/// `M = L ∘ K`. The difference form keeps constant columns exactly zero.
fn hsic_block(data: &DataMatrix, kernel: &GramMatrix, other_centered: &GramMatrix) -> Array2<f64> {
    let n = data.n();
    let d = data.d();
    let sigma = kernel.sigma.sigma();
    let coef = -2.0 / (sigma * sigma * (n * n) as f64);
    let mut out = Array2::<f64>::zeros((n, d));
    let mut acc = vec![0.0; d];
    for i in 0..n {
        acc.iter_mut().for_each(|a| *a = 0.0);
        let xi = data.row(i);
        for k in 0..n {
            let m = kernel.values[[i, k]] * other_centered.values[[i, k]];
            let xk = data.row(k);
            for j in 0..d {
                acc[j] += m * (xi[j] - xk[j]);
            }
        }
        for j in 0..d {
            out[[i, j]] = coef * acc[j];
        }
    }
    out
}

/// Exact HSIC sensitivity map.
pub fn hsic_sensitivity(
    x: &DataMatrix,
    y: &DataMatrix,
    sigma_x: Bandwidth,
    sigma_y: Bandwidth,
) -> Result<SensitivityMap> {
    check_rows(x, y)?;
    let kx = se_kernel_matrix(x, sigma_x);
    let ky = se_kernel_matrix(y, sigma_y);
    let lx = center_gram(&kx);
    let ly = center_gram(&ky);
    Ok(SensitivityMap {
        sx: hsic_block(x, &kx, &ly),
        sy: hsic_block(y, &ky, &lx),
        method: Method::Hsic,
    })
}

/// One block of the randomized map. `raw` is the uncentered map of the
/// variable being differentiated, `other` the centered map of its partner,
/// and `(p, q)` the cross-covariance oriented with this variable first.
fn rhsic_block(raw: &FeatureMap, other: &FeatureMap, p: &Array2<f64>, q: &Array2<f64>) -> Array2<f64> {
    let n = raw.n() as f64;
    // rows of U and V are u_i and v_i
    let u = other.cos.dot(&p.t()) + other.sin.dot(&q.t());
    let v = other.sin.dot(&p.t()) - other.cos.dot(&q.t());
    let inner = &raw.cos * &v - &raw.sin * &u;
    inner.dot(&raw.frequencies.w.t()) * (2.0 / (n * n))
}

fn consistent(data: &DataMatrix, z: &FeatureMap, name: &str) -> Result<()> {
    if !z.centered {
        return Err(Error::NotCentered);
    }
    if z.n() != data.n() || z.frequencies.input_dim() != data.d() {
        return Err(Error::ShapeMismatch(format!(
            "{name}: data is {}x{}, feature map has {} rows and input dimension {}",
            data.n(),
            data.d(),
            z.n(),
            z.frequencies.input_dim()
        )));
    }
    Ok(())
}

/// RHSIC sensitivity map at the frequencies carried by the centered maps.
pub fn rhsic_sensitivity(x: &DataMatrix, y: &DataMatrix, zx: &FeatureMap, zy: &FeatureMap) -> Result<SensitivityMap> {
    check_rows(x, y)?;
    consistent(x, zx, "x")?;
    consistent(y, zy, "y")?;
    let c = rhsic_cross_covariance(zx, zy)?;
    let raw_x = feature_map(x, &zx.frequencies)?;
    let raw_y = feature_map(y, &zy.frequencies)?;
    let pt = c.real.t().to_owned();
    let qt = c.imag.t().mapv(|v| -v);
    Ok(SensitivityMap {
        sx: rhsic_block(&raw_x, zy, &c.real, &c.imag),
        sy: rhsic_block(&raw_y, zx, &pt, &qt),
        method: Method::Rhsic,
    })
}

/// Mean-of-squares aggregation per sample and per feature.
pub fn aggregate(s: &SensitivityMap) -> SensitivityAggregate {
    let total = s.total();
    let (n, d) = total.dim();
    let sq = total.mapv(|v| v * v);
    let row_ss: Vec<f64> = sq.rows().into_iter().map(|r| r.sum()).collect();
    let dx = s.sx.ncols();
    SensitivityAggregate {
        per_sample: row_ss.iter().map(|v| if d == 0 { 0.0 } else { v / d as f64 }).collect(),
        per_feature: sq
            .columns()
            .into_iter()
            .map(|c| if n == 0 { 0.0 } else { c.sum() / n as f64 })
            .collect(),
        sample_norms: row_ss.iter().map(|v| v.sqrt()).collect(),
        sample_norms_x: sq.rows().into_iter().map(|r| r.iter().take(dx).sum::<f64>().sqrt()).collect(),
    }
}

/// Mean of squared entries of a block; zero for an empty block.
pub fn block_mean_square(block: &Array2<f64>) -> f64 {
    if block.is_empty() {
        return 0.0;
    }
    block.iter().map(|v| v * v).sum::<f64>() / block.len() as f64
}

/// Step rule for central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    /// The same step for every entry.
    Absolute(f64),
    /// `rel × sample std` of each feature; `rel` itself for constant features.
    RelativeToStd(f64),
}

impl Default for FdStep {
    fn default() -> Self {
        FdStep::RelativeToStd(1e-5)
    }
}

fn steps(data: &DataMatrix, step: FdStep) -> Result<Vec<f64>> {
    let hs = match step {
        FdStep::Absolute(h) => vec![h; data.d()],
        FdStep::RelativeToStd(rel) => data
            .column_std()
            .into_iter()
            .map(|sd| if sd > 0.0 { rel * sd } else { rel })
            .collect(),
    };
    if hs.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidParameter(format!("finite-difference steps must be > 0, got {hs:?}")));
    }
    Ok(hs)
}

/// Central-difference gradient of `stat` with respect to every entry of `x`
/// and `y`. Anything `stat` closes over (bandwidths, frequencies) stays fixed.
pub fn finite_difference_map<F>(stat: F, x: &DataMatrix, y: &DataMatrix, step: FdStep) -> Result<SensitivityMap>
where
    F: Fn(&DataMatrix, &DataMatrix) -> Result<f64>,
{
    check_rows(x, y)?;
    let hx = steps(x, step)?;
    let hy = steps(y, step)?;
    let mut sx = Array2::<f64>::zeros((x.n(), x.d()));
    for i in 0..x.n() {
        for j in 0..x.d() {
            let v = x.values()[[i, j]];
            let up = stat(&x.with_entry(i, j, v + hx[j])?, y)?;
            let down = stat(&x.with_entry(i, j, v - hx[j])?, y)?;
            sx[[i, j]] = (up - down) / (2.0 * hx[j]);
        }
    }
    let mut sy = Array2::<f64>::zeros((y.n(), y.d()));
    for i in 0..y.n() {
        for j in 0..y.d() {
            let v = y.values()[[i, j]];
            let up = stat(x, &y.with_entry(i, j, v + hy[j])?)?;
            let down = stat(x, &y.with_entry(i, j, v - hy[j])?)?;
            sy[[i, j]] = (up - down) / (2.0 * hy[j]);
        }
    }
    Ok(SensitivityMap {
        sx,
        sy,
        method: Method::Hsic,
    })
}

/// Largest entrywise discrepancy between an analytic map and a
/// finite-difference reference: relative where `|reference| ≥ floor`, absolute
/// otherwise.
pub fn max_gradient_error(analytic: &SensitivityMap, reference: &SensitivityMap, floor: f64) -> (f64, f64) {
    let a = analytic.total();
    let r = reference.total();
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    for (p, q) in a.iter().zip(r.iter()) {
        if q.abs() < floor {
            worst_abs = worst_abs.max((p - q).abs());
        } else {
            worst_rel = worst_rel.max((p - q).abs() / q.abs());
        }
    }
    (worst_rel, worst_abs)
}
