//! Deterministic seed derivation.
//!
//! Every random stream in a run is keyed by the run seed plus a small tuple
//! (stream tag, client id, round). The mixing function is the SplitMix64
//! finalizer applied in sequence:
//!
//! ```text
//! h = splitmix64(seed ^ tag)
//! h = splitmix64(h ^ client)
//! h = splitmix64(h ^ round)
//! ```
//!
//! where `splitmix64(z)` adds `0x9E3779B97F4A7C15` and then applies the
//! usual xor-shift-multiply finalizer. All arithmetic is wrapping `u64`,
//! so any implementation reproduces the same derived seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_ATTACK: u64 = 0x6174_7461_636b;
pub const TAG_SELECT: u64 = 0x7365_6c65_6374;
pub const TAG_LOCAL: u64 = 0x6c6f_6361_6c;
pub const TAG_PARTITION: u64 = 0x7061_7274;
pub const TAG_INIT: u64 = 0x696e_6974;
pub const TAG_SPLIT: u64 = 0x7370_6c69_74;

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream identified by `(tag, client, round)` within a run.
pub fn derive(seed: u64, tag: u64, client: u64, round: u64) -> u64 {
    let h = splitmix64(seed ^ tag);
    let h = splitmix64(h ^ client);
    splitmix64(h ^ round)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
