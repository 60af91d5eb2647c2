//! Seed derivation for reproducible, schedule-independent random streams.
//!
//! Every consumer of randomness (a simulated sequence, a weight
//! initialisation, a permutation) gets its own ChaCha8 stream keyed by a
//! 64-bit seed mixed from the experiment seed and a small tuple of
//! coordinates. Nothing is shared between streams, so trials can run in any
//! order on any number of threads and still produce identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Finaliser from SplitMix64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of coordinates.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut state = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for &p in path {
        state = mix64(state.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix64(p.wrapping_add(1)));
    }
    state
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
