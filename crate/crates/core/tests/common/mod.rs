#![allow(dead_code)]

use kdep::{Bandwidth, BandwidthSpec, DataMatrix};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    DataMatrix::new(Array2::from_shape_fn((n, d), |_| StandardNormal.sample(rng))).unwrap()
}

pub fn uniform(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    DataMatrix::new(Array2::from_shape_fn((n, d), |_| rng.random::<f64>())).unwrap()
}

pub fn auto(x: &DataMatrix) -> Bandwidth {
    BandwidthSpec::AutoMean.resolve(x).unwrap()
}

pub fn bw(s: f64) -> Bandwidth {
    Bandwidth::fixed(s).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
