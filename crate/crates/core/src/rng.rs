//! Seed derivation and random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream
//! (`rand_chacha`), a counter-based generator whose output depends only on
//! `(seed, stream, position)`. Independent purposes use distinct stream
//! ids under the same seed; per-repetition seeds are derived from a master
//! seed with SplitMix64, so repetitions are reproducible in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator name recorded in dataset metadata.
pub const GENERATOR_NAME: &str = "chacha8-rand_chacha-0.3";

/// Stream ids for the separate consumers of a seed.
pub mod stream {
    pub const LABELS: u64 = 1;
    pub const EDGES: u64 = 2;
    pub const LOGITS: u64 = 3;
    pub const EVAL_SAMPLE: u64 = 10;
    pub const UNIFORMS: u64 = 11;
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for repetition `rep` of a run seeded with `master`.
pub fn derive_seed(master: u64, rep: u64) -> u64 {
    splitmix64(master ^ splitmix64(rep.wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` uniforms on `[0, 1)`, one per node in id order.
pub fn node_uniforms(seed: u64, n: usize) -> Vec<f64> {
    use rand::Rng;
    let mut rng = stream_rng(seed, stream::UNIFORMS);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}
