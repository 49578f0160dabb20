//! Seed derivation for reproducible experiments.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator whose
//! seed is derived from one root seed and a domain label. Results therefore
//! depend only on `(root seed, domain, index)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain labels for derived seeds.
pub mod domain {
    pub const FREQUENCIES_X: u64 = 0x01;
    pub const FREQUENCIES_Y: u64 = 0x02;
    pub const PERMUTATIONS: u64 = 0x10;
    pub const PERMUTATION_FREQUENCIES: u64 = 0x11;
    pub const PAIRS: u64 = 0x20;
    pub const DATA: u64 = 0x30;
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `root` and a stream label.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    mix(mix(root) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Generator for `(root, stream)`.
pub fn rng_for(root: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, stream))
}

/// Generator for the `index`-th draw of a domain, using ChaCha word streams so
/// that draws are independent of one another and of evaluation order.
pub fn indexed_rng(root: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(root, domain));
    rng.set_stream(index);
    rng
}
