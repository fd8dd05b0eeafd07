//! Counter-based seed splitting.
//!
//! A trial seed is `mix(mix(root ^ stream) + index)` where `stream` is the
//! FNV-1a hash of the stream name and `mix` is the SplitMix64 finalizer.
//! Trial `i` of a stream depends only on `(root, name, i)`, so adding trials
//! never changes the data of earlier trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn trial_seed(root: u64, stream: &str, index: u64) -> u64 {
    mix(mix(root ^ stream_id(stream)).wrapping_add(index))
}

pub fn rng_from(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_rng(root: u64, stream: &str, index: u64) -> TrialRng {
    rng_from(trial_seed(root, stream, index))
}
