//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Seeded printable-ASCII passwords of 4 to 16 characters.
pub fn password_corpus(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.random_range(4..=16);
            (0..len).map(|_| rng.random_range(32u8..=126) as char).collect()
        })
        .collect()
}
