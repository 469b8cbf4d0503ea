//! Counter-based random streams.
//!
//! Draw `i` of a run with seed `s` must be reproducible no matter in which
//! order (or on how many threads) the draws are made. We get this from
//! ChaCha: the seed keys the cipher and a 64-bit stream id selects an
//! independent counter stream, so `stream_rng(seed, i)` is a pure function
//! of `(seed, i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent generator for stream `stream` of the run keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Two standard normals from the `(seed, stream)` stream.
pub fn normal_pair(seed: u64, stream: u64) -> (f64, f64) {
    let mut rng = stream_rng(seed, stream);
    let a: f64 = StandardNormal.sample(&mut rng);
    let b: f64 = StandardNormal.sample(&mut rng);
    (a, b)
}

/// Per-sample seed for ensembles: sample `i` of an ensemble with base seed
/// `seed_base` uses `seed_base ^ i`.
pub fn sample_seed(seed_base: u64, index: usize) -> u64 {
    seed_base ^ index as u64
}

/// Derived seed for a named sub-experiment, so different observables of one
/// run consume disjoint streams. SplitMix64 finalizer on `(seed, label)`.
pub fn sub_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
