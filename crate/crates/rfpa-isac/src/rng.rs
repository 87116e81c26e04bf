//! Deterministic RNG stream derivation.
//!
//! Every random quantity in the library is drawn from a ChaCha stream keyed
//! by a master seed plus up to three stream tags (experiment point, trial,
//! role, ...). Streams derived from distinct tag tuples are independent, and
//! results are reproducible no matter how work is scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent RNG stream from `(seed, tags)`.
pub fn stream_rng(seed: u64, tags: [u64; 3]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tags[0].to_le_bytes());
    key[16..24].copy_from_slice(&tags[1].to_le_bytes());
    key[24..32].copy_from_slice(&tags[2].to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream tag namespaces, so unrelated draws never share a stream.
pub mod tag {
    pub const CHANNEL: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const MESSAGE: u64 = 3;
    pub const SECRETS: u64 = 4;
    pub const PROBE: u64 = 5;
    pub const EVE_GUESS: u64 = 6;
    pub const FCM_INIT: u64 = 7;
    pub const AF_DRAW: u64 = 8;
    pub const EVE_CHANNEL: u64 = 9;
    pub const EVE_NOISE: u64 = 10;
}
