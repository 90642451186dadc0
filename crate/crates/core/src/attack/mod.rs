//! Security experiments against the dual-server scheme.
//!
//! Each experiment measures what an attacker obtains and reports it as a
//! serializable value; none of them asserts a security claim on its own.

mod guessing;
mod replay;
mod stolen;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

pub use guessing::{offline_acceptance_count, run_guessing, GuessingConfig, GuessingReport};
pub use replay::{
    read_transcript, run_replay_as_bs, run_replay_client_as, write_transcript, Direction, RecordingRelay,
    ReplayAttempt, ReplayLink, ReplayReport, TranscriptEntry,
};
pub use stolen::{run_stolen_verifier, Fragment, Leak, LeakError, StolenVerifierReport};

/// Seeded random printable-ASCII passwords with lengths in `lengths`.
pub fn random_passwords(count: usize, lengths: std::ops::RangeInclusive<usize>, seed: u64) -> Vec<String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.random_range(lengths.clone());
            (0..len).map(|_| rng.random_range(32u8..=126) as char).collect()
        })
        .collect()
}

/// Seeded dictionary of `size` distinct words that contains `planted`.
pub fn dictionary_with(planted: &str, size: usize, seed: u64) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(size);
    let mut seen = std::collections::HashSet::new();
    seen.insert(planted.to_owned());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    while words.len() + 1 < size {
        let len = rng.random_range(4..=10);
        let word: String = (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    let at = if size == 0 { 0 } else { rng.random_range(0..size) };
    words.insert(at.min(words.len()), planted.to_owned());
    words
}

/// Serializes a report as a single JSON line.
pub fn to_json_line<T: Serialize>(report: &T) -> String {
    serde_json::to_string(report).expect("reports always serialize")
}
