//! Seed derivation and per-purpose random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master seed used when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 20_230_517;

/// Independent stream identifiers within one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Placement = 1,
    Sensing = 2,
    Topology = 3,
    Gains = 4,
    Source = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` in grid cell `cell`.
pub fn derive_seed(master: u64, cell: u64, run: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell) ^ run)
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
