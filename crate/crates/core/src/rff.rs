//! Random Fourier features for the squared-exponential kernel.
//!
//! The complex map `z(x) = exp(i Wᵀx) / √D` is stored as two real matrices,
//! `cos(XW)/√D` and `sin(XW)/√D`. Kernel reconstruction uses the Hermitian
//! product, `Re(Z Zᴴ)_ij = (1/D) Σ_k cos(w_kᵀ(x_i − x_j))`, which is the
//! Monte Carlo estimate of the SE kernel when `w_k ~ N(0, σ⁻² I)`.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernelcore::{dot, shifted_mean, Bandwidth, DataMatrix, GramMatrix};
use crate::seeding::{derive_seed, domain};

/// A `d × D` matrix of sampled frequencies, reproducible from
/// `(seed, d, D, sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    pub w: Array2<f64>,
    pub sigma: Bandwidth,
    pub seed: u64,
}

impl FrequencyMatrix {
    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn features(&self) -> usize {
        self.w.ncols()
    }
}

/// Randomized features of a data matrix: real and imaginary parts of the
/// complex exponential map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub cos: Array2<f64>,
    pub sin: Array2<f64>,
    pub centered: bool,
    pub frequencies: FrequencyMatrix,
}

impl FeatureMap {
    pub fn n(&self) -> usize {
        self.cos.nrows()
    }

    pub fn features(&self) -> usize {
        self.cos.ncols()
    }

    /// Centered copy; a no-op on maps that are already centered.
    pub fn into_centered(self) -> FeatureMap {
        if self.centered {
            self
        } else {
            center_parts(self)
        }
    }

    /// Same map with rows reordered: row `i` of the result is row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> FeatureMap {
        FeatureMap {
            cos: self.cos.select(ndarray::Axis(0), perm),
            sin: self.sin.select(ndarray::Axis(0), perm),
            centered: self.centered,
            frequencies: self.frequencies.clone(),
        }
    }
}

/// Draws `W` with i.i.d. `N(0, σ⁻²)` entries, column by column.
pub fn sample_frequencies(d: usize, features: usize, sigma: Bandwidth, seed: u64) -> Result<FrequencyMatrix> {
    if d == 0 || features == 0 {
        return Err(Error::InvalidParameter(format!(
            "frequency matrix needs d >= 1 and D >= 1, got d = {d}, D = {features}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv = 1.0 / sigma.sigma();
    let mut w = Array2::<f64>::zeros((d, features));
    for k in 0..features {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            w[[j, k]] = z * inv;
        }
    }
    Ok(FrequencyMatrix { w, sigma, seed })
}

/// Frequencies for an `(X, Y)` pair from independent sub-streams of one root
/// seed.
pub fn sample_frequency_pair(
    dims: (usize, usize),
    features: (usize, usize),
    sigmas: (Bandwidth, Bandwidth),
    root_seed: u64,
) -> Result<(FrequencyMatrix, FrequencyMatrix)> {
    let wx = sample_frequencies(dims.0, features.0, sigmas.0, derive_seed(root_seed, domain::FREQUENCIES_X))?;
    let wy = sample_frequencies(dims.1, features.1, sigmas.1, derive_seed(root_seed, domain::FREQUENCIES_Y))?;
    Ok((wx, wy))
}

/// `cos(XW)/√D` and `sin(XW)/√D`, uncentered.
pub fn feature_map(x: &DataMatrix, w: &FrequencyMatrix) -> Result<FeatureMap> {
    if x.d() != w.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "data has {} columns but the frequency matrix has {} rows",
            x.d(),
            w.input_dim()
        )));
    }
    let proj = x.values().dot(&w.w);
    let scale = 1.0 / (w.features() as f64).sqrt();
    Ok(FeatureMap {
        cos: proj.mapv(|p| p.cos() * scale),
        sin: proj.mapv(|p| p.sin() * scale),
        centered: false,
        frequencies: w.clone(),
    })
}

fn center_columns(m: &mut Array2<f64>) {
    let n = m.nrows();
    for mut col in m.columns_mut() {
        let mean = shifted_mean(col.iter().copied(), n);
        col.mapv_inplace(|v| v - mean);
    }
}

fn center_parts(mut z: FeatureMap) -> FeatureMap {
    center_columns(&mut z.cos);
    center_columns(&mut z.sin);
    z.centered = true;
    z
}

/// Subtracts column means from both parts; equivalent to `H·Z`.
pub fn center_features(z: &FeatureMap) -> Result<FeatureMap> {
    if z.centered {
        return Err(Error::AlreadyCentered);
    }
    Ok(center_parts(z.clone()))
}

/// `Re(Z Zᴴ) = cos·cosᵀ + sin·sinᵀ`, filled on the upper triangle and mirrored.
pub fn approx_gram(z: &FeatureMap) -> GramMatrix {
    let n = z.n();
    let mut k = Array2::<f64>::zeros((n, n));
    let rows_c: Vec<Vec<f64>> = z.cos.rows().into_iter().map(|r| r.to_vec()).collect();
    let rows_s: Vec<Vec<f64>> = z.sin.rows().into_iter().map(|r| r.to_vec()).collect();
    for i in 0..n {
        for j in i..n {
            let v = dot(&rows_c[i], &rows_c[j]) + dot(&rows_s[i], &rows_s[j]);
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    GramMatrix {
        values: k,
        sigma: z.frequencies.sigma,
        centered: z.centered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelcore::{bandwidth_heuristic, se_kernel_matrix, Heuristic};
    use ndarray::Array2;
    use rand_distr::Uniform;

    fn bw(s: f64) -> Bandwidth {
        Bandwidth::fixed(s).unwrap()
    }

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::new(Array2::from_shape_fn((n, d), |_| StandardNormal.sample(&mut rng))).unwrap()
    }

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn huge_bandwidth_shrinks_frequencies() {
        let w = sample_frequencies(1, 1000, bw(1e6), 9).unwrap();
        let mean = w.w.mean().unwrap();
        let var = w.w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 999.0;
        assert!(var.sqrt() < 1e-4);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_frequencies(2, 8, bw(1.0), 42).unwrap();
        let b = sample_frequencies(2, 8, bw(1.0), 42).unwrap();
        assert_eq!(a, b);
        let c = sample_frequencies(2, 8, bw(1.0), 43).unwrap();
        assert_ne!(a.w, c.w);
    }

    #[test]
    fn frequency_variance_is_inverse_sigma_squared() {
        let w = sample_frequencies(1, 100_000, bw(2.0), 1).unwrap();
        let n = w.w.len() as f64;
        let mean = w.w.sum() / n;
        let var = w.w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 0.25).abs() / 0.25 < 0.02, "variance {var}");
    }

    #[test]
    fn zero_sized_requests_fail() {
        assert!(sample_frequencies(0, 4, bw(1.0), 0).is_err());
        assert!(sample_frequencies(2, 0, bw(1.0), 0).is_err());
    }

    #[test]
    fn pair_streams_are_independent() {
        let (wx, wy) = sample_frequency_pair((2, 2), (5, 5), (bw(1.0), bw(1.0)), 7).unwrap();
        assert_ne!(wx.w, wy.w);
        let (wx2, _) = sample_frequency_pair((2, 2), (5, 5), (bw(1.0), bw(1.0)), 7).unwrap();
        assert_eq!(wx, wx2);
    }

    #[test]
    fn zero_row_maps_to_constant() {
        let x = DataMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let w = sample_frequencies(2, 16, bw(1.0), 3).unwrap();
        let z = feature_map(&x, &w).unwrap();
        assert!(z.cos.iter().all(|&c| c == 0.25));
        assert!(z.sin.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn entries_have_modulus_one_over_d() {
        let x = random_matrix(6, 3, 2);
        let w = sample_frequencies(3, 10, bw(0.7), 5).unwrap();
        let z = feature_map(&x, &w).unwrap();
        for (c, s) in z.cos.iter().zip(z.sin.iter()) {
            assert!((c * c + s * s - 0.1).abs() < 1e-15);
        }
        for i in 0..6 {
            let norm: f64 = z.cos.row(i).iter().chain(z.sin.row(i).iter()).map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let x = random_matrix(4, 3, 1);
        let w = sample_frequencies(2, 8, bw(1.0), 1).unwrap();
        assert!(matches!(feature_map(&x, &w), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn approx_gram_converges_to_exact() {
        let x = random_matrix(20, 2, 4);
        let sigma = bandwidth_heuristic(&x, Heuristic::MeanDistance).unwrap();
        let exact = se_kernel_matrix(&x, sigma);
        let w = sample_frequencies(2, 4096, sigma, 8).unwrap();
        let approx = approx_gram(&feature_map(&x, &w).unwrap());
        assert!(max_abs_diff(&approx.values, &exact.values) < 0.05);

        let x = random_matrix(15, 2, 5);
        let exact = se_kernel_matrix(&x, bw(1.0));
        let w = sample_frequencies(2, 2048, bw(1.0), 21).unwrap();
        let approx = approx_gram(&feature_map(&x, &w).unwrap());
        assert!(max_abs_diff(&approx.values, &exact.values) < 0.06);
    }

    #[test]
    fn approx_gram_unit_diagonal_and_symmetric() {
        let x = random_matrix(9, 2, 6);
        let w = sample_frequencies(2, 33, bw(1.3), 2).unwrap();
        let k = approx_gram(&feature_map(&x, &w).unwrap());
        assert!(k.values.diag().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(k.values == k.values.t());
    }

    #[test]
    fn zero_frequency_gives_all_ones() {
        let x = random_matrix(5, 1, 7);
        let w = FrequencyMatrix {
            w: Array2::zeros((1, 1)),
            sigma: bw(1.0),
            seed: 0,
        };
        let k = approx_gram(&feature_map(&x, &w).unwrap());
        assert!(k.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn centering_single_row_and_constant_data() {
        let w = sample_frequencies(2, 6, bw(1.0), 1).unwrap();
        let one = DataMatrix::from_rows(&[vec![0.3, -1.1]]).unwrap();
        let c = center_features(&feature_map(&one, &w).unwrap()).unwrap();
        assert!(c.cos.iter().chain(c.sin.iter()).all(|&v| v == 0.0));

        let same = DataMatrix::from_rows(&vec![vec![0.1, 0.7]; 9]).unwrap();
        let c = center_features(&feature_map(&same, &w).unwrap()).unwrap();
        assert!(c.centered);
        assert!(c.cos.iter().chain(c.sin.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn centering_matches_explicit_h() {
        let n = 9;
        let x = random_matrix(n, 2, 8);
        let w = sample_frequencies(2, 5, bw(0.9), 4).unwrap();
        let z = feature_map(&x, &w).unwrap();
        let h = Array2::<f64>::eye(n) - Array2::<f64>::from_elem((n, n), 1.0 / n as f64);
        let c = center_features(&z).unwrap();
        assert!(max_abs_diff(&c.cos, &h.dot(&z.cos)) < 1e-12);
        assert!(max_abs_diff(&c.sin, &h.dot(&z.sin)) < 1e-12);
        for col in c.cos.columns().into_iter().chain(c.sin.columns()) {
            assert!(col.sum().abs() < 1e-10 * n as f64);
        }
    }

    #[test]
    fn recentering_is_flagged_and_idempotent() {
        let x = random_matrix(7, 2, 10);
        let w = sample_frequencies(2, 4, bw(1.0), 4).unwrap();
        let once = center_features(&feature_map(&x, &w).unwrap()).unwrap();
        assert_eq!(center_features(&once).unwrap_err(), Error::AlreadyCentered);
        assert_eq!(once.clone().into_centered(), once);
    }

    #[test]
    fn seed_average_beats_single_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let u = Uniform::new(-1.0, 1.0).unwrap();
        let x = DataMatrix::new(Array2::from_shape_fn((10, 2), |_| u.sample(&mut rng))).unwrap();
        let exact = se_kernel_matrix(&x, bw(0.8)).values;
        let mut avg = Array2::<f64>::zeros((10, 10));
        let mut single_errors = Vec::new();
        for s in 0..200 {
            let w = sample_frequencies(2, 64, bw(0.8), 1000 + s).unwrap();
            let k = approx_gram(&feature_map(&x, &w).unwrap()).values;
            single_errors.push(max_abs_diff(&k, &exact));
            avg += &(k / 200.0);
        }
        let avg_err = max_abs_diff(&avg, &exact);
        let best_single = single_errors.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(avg_err < best_single, "{avg_err} vs {best_single}");
    }
}
