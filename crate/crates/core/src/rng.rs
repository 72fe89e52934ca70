//! Seed partitioning for reproducible parallel replication.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for task `stream` under `seed`; independent of the order in
/// which tasks run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, e.g. for replicate `index` of an outer loop.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed ^ 0x9E37_79B9_7F4A_7C15, index).next_u64()
}
