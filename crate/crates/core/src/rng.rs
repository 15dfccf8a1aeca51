//! Deterministic random streams.
//!
//! Every parallel unit of work (one requested sample, one verification
//! instance) gets its own ChaCha stream keyed by `(seed, index)`, so results do
//! not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// The root stream for `seed`.
pub fn root(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
