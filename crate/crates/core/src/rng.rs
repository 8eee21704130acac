use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Single-owner random stream. Independent streams share a seed and differ
/// in the ChaCha stream id, so per-path draws do not depend on thread count.
pub type RngStream = ChaCha8Rng;

pub fn rng_stream(seed: u64, stream: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
