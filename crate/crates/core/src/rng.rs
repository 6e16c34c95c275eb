//! Named deterministic random streams.
//!
//! Every consumer of randomness in a run draws from its own ChaCha8 stream,
//! keyed by `(seed, run_index, stream)`. Two policies simulated on the same
//! seed therefore see identical arrivals, service draws and UE motion, no
//! matter how differently they consume the other streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Arrivals = 1,
    Service = 2,
    Mobility = 3,
    Battery = 4,
    Placement = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one named stream of one run.
pub fn stream_rng(seed: u64, run: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(run)));
    rng.set_stream(stream as u64);
    rng
}

/// Generator for auxiliary, non-simulation uses (dataset splits, weight init).
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed))
}
