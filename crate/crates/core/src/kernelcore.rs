//! Dense squared-exponential kernels, bandwidth heuristics, and Gram centering.
//!
//! All pairwise squared distances use the expanded form
//! `‖a‖² + ‖b‖² − 2⟨a, b⟩`, clamped at zero. Norms and inner products share
//! one summation routine, so identical rows have a distance of exactly zero.
//!
//! Reduction order is fixed everywhere: rows ascending, then columns
//! ascending. Kernel matrices are filled on the upper triangle and mirrored,
//! which makes them exactly symmetric.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// An `n × d` matrix of observations; rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    /// Wraps `values`, rejecting NaN and infinities.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { row, col });
        }
        Ok(Self {
            values: values.as_standard_layout().into_owned(),
        })
    }

    /// A single-feature matrix from a column of values.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(Array1::from(values.to_vec()).insert_axis(Axis(1)))
    }

    /// Builds a matrix from row vectors of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(format!(
                "row {bad} has {} columns, expected {d}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values
            .row(i)
            .to_slice()
            .expect("DataMatrix is stored in standard layout")
    }

    /// Feature `j` as its own `n × 1` matrix.
    pub fn column(&self, j: usize) -> DataMatrix {
        DataMatrix {
            values: self.values.column(j).to_owned().insert_axis(Axis(1)),
        }
    }

    /// Values of feature `j`.
    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.values.column(j).to_vec()
    }

    /// Sets entry `(i, j)`; the value must be finite.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<DataMatrix> {
        if !value.is_finite() {
            return Err(Error::NonFiniteInput { row: i, col: j });
        }
        let mut out = self.clone();
        out.values[[i, j]] = value;
        Ok(out)
    }

    /// Same data with rows reordered so that row `i` of the result is row
    /// `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> DataMatrix {
        DataMatrix {
            values: self.values.select(Axis(0), perm),
        }
    }

    /// Column z-scores with the sample (n − 1) standard deviation. Constant
    /// columns are centered only.
    pub fn standardized(&self) -> DataMatrix {
        let n = self.n();
        let mut values = self.values.clone();
        for mut col in values.columns_mut() {
            let mean = shifted_mean(col.iter().copied(), n);
            col.mapv_inplace(|v| v - mean);
            let ss: f64 = col.iter().map(|v| v * v).sum();
            let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
            if sd > 0.0 {
                col.mapv_inplace(|v| v / sd);
            }
        }
        DataMatrix { values }
    }

    /// Sample standard deviation of every column.
    pub fn column_std(&self) -> Vec<f64> {
        let n = self.n();
        self.values
            .columns()
            .into_iter()
            .map(|col| {
                if n < 2 {
                    return 0.0;
                }
                let mean = shifted_mean(col.iter().copied(), n);
                let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
                (ss / (n - 1) as f64).sqrt()
            })
            .collect()
    }
}

/// How a bandwidth was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    MeanDistance,
    MedianDistance,
    Fixed,
}

/// Length scale `σ > 0` of an isotropic squared-exponential kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    sigma: f64,
    heuristic: Heuristic,
}

impl Bandwidth {
    pub fn fixed(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidBandwidth(sigma));
        }
        Ok(Self {
            sigma,
            heuristic: Heuristic::Fixed,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic
    }
}

/// Bandwidth selection rule used by configuration layers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BandwidthSpec {
    #[default]
    AutoMean,
    AutoMedian,
    Fixed(f64),
}

impl BandwidthSpec {
    pub fn resolve(&self, x: &DataMatrix) -> Result<Bandwidth> {
        match *self {
            BandwidthSpec::AutoMean => bandwidth_heuristic(x, Heuristic::MeanDistance),
            BandwidthSpec::AutoMedian => bandwidth_heuristic(x, Heuristic::MedianDistance),
            BandwidthSpec::Fixed(s) => Bandwidth::fixed(s),
        }
    }
}

/// A symmetric kernel matrix together with the bandwidth that produced it.
///
/// Uncentered SE Gram matrices have a unit diagonal and entries in `(0, 1]`;
/// centered ones (see [`center_gram`]) have zero row and column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: Array2<f64>,
    pub sigma: Bandwidth,
    pub centered: bool,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Mean computed around the first element, so a run of identical values has
/// a mean equal to that value bit for bit.
pub(crate) fn shifted_mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    let mut iter = values.peekable();
    let Some(&first) = iter.peek() else {
        return 0.0;
    };
    let dev: f64 = iter.map(|v| v - first).sum();
    first + dev / n as f64
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(crate) fn squared_norms(x: &DataMatrix) -> Vec<f64> {
    (0..x.n()).map(|i| dot(x.row(i), x.row(i))).collect()
}

#[inline]
pub(crate) fn squared_distance(x: &DataMatrix, norms: &[f64], i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    (norms[i] + norms[j] - 2.0 * dot(x.row(i), x.row(j))).max(0.0)
}

/// All `n(n−1)/2` pairwise Euclidean distances, row-major over `i < j`.
pub fn pairwise_distances(x: &DataMatrix) -> Vec<f64> {
    let n = x.n();
    let norms = squared_norms(x);
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(squared_distance(x, &norms, i, j).sqrt());
        }
    }
    out
}

/// Bandwidth from the mean or median pairwise Euclidean distance.
pub fn bandwidth_heuristic(x: &DataMatrix, heuristic: Heuristic) -> Result<Bandwidth> {
    if x.n() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: x.n(),
        });
    }
    let mut dists = pairwise_distances(x);
    let sigma = match heuristic {
        Heuristic::MeanDistance => dists.iter().sum::<f64>() / dists.len() as f64,
        Heuristic::MedianDistance => {
            let m = dists.len();
            dists.sort_by(f64::total_cmp);
            if m % 2 == 1 {
                dists[m / 2]
            } else {
                0.5 * (dists[m / 2 - 1] + dists[m / 2])
            }
        }
        Heuristic::Fixed => {
            return Err(Error::InvalidParameter(
                "Fixed is not a data-driven heuristic".into(),
            ))
        }
    };
    if !(sigma > 0.0) {
        return Err(Error::AllSamplesIdentical);
    }
    Ok(Bandwidth { sigma, heuristic })
}

/// `K_ij = exp(−‖x_i − x_j‖² / (2σ²))`.
///
/// Finite input is guaranteed by [`DataMatrix`], so this cannot fail.
pub fn se_kernel_matrix(x: &DataMatrix, sigma: Bandwidth) -> GramMatrix {
    let n = x.n();
    let norms = squared_norms(x);
    let scale = -1.0 / (2.0 * sigma.sigma * sigma.sigma);
    let mut k = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        k[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let v = (scale * squared_distance(x, &norms, i, j)).exp();
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    GramMatrix {
        values: k,
        sigma,
        centered: false,
    }
}

/// Double-centers a square matrix: `K − row means − column means + grand mean`,
/// which equals `HKH` with `H = I − 11ᵀ/n`.
pub fn center_matrix(k: &ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, m) = k.dim();
    if n != m {
        return Err(Error::ShapeMismatch(format!("{n}x{m} matrix is not square")));
    }
    let row_means: Vec<f64> = k.rows().into_iter().map(|r| shifted_mean(r.iter().copied(), n)).collect();
    let col_means: Vec<f64> = k
        .columns()
        .into_iter()
        .map(|c| shifted_mean(c.iter().copied(), n))
        .collect();
    let grand = shifted_mean(k.iter().copied(), n * n);
    let mut out = k.to_owned();
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = *v - row_means[i] - col_means[j] + grand;
    }
    Ok(out)
}

/// `HKH` for a symmetric Gram matrix, in O(n²). The result is exactly
/// symmetric.
pub fn center_gram(k: &GramMatrix) -> GramMatrix {
    let n = k.n();
    let v = &k.values;
    let means: Vec<f64> = v.rows().into_iter().map(|r| shifted_mean(r.iter().copied(), n)).collect();
    let grand = shifted_mean(v.iter().copied(), n * n);
    let mut out = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let c = v[[i, j]] - (means[i] + means[j]) + grand;
            out[[i, j]] = c;
            out[[j, i]] = c;
        }
    }
    GramMatrix {
        values: out,
        sigma: k.sigma,
        centered: true,
    }
}
