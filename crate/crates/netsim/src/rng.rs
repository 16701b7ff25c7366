//! Seed expansion and per-node random streams.
//!
//! Every run seed is the `index`-th output of a SplitMix64 generator started
//! at the master seed, so appending runs never shifts earlier ones. Within a
//! run each node owns independent ChaCha8 streams keyed by `(node, purpose)`,
//! which keeps attacker coin flips independent of event interleaving.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` under `master`. Kept below 2^63 so it survives TOML.
pub fn run_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))) >> 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Drop = 1,
    Overhear = 2,
    Placement = 3,
    Jitter = 4,
}

pub fn stream(seed: u64, node: u32, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(node) << 8) | purpose as u64);
    rng
}
