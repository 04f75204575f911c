//! Seeded generators.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`) seeded
//! with `seed_from_u64(seed)`. Independent workers use separate ChaCha
//! streams of the same seed, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type UwRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_170_603;

/// Generator for work item `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> UwRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
