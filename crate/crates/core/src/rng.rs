//! Deterministic seeding with independent substreams.
//!
//! Every randomized operation in this crate is a pure function of its
//! parameters and a 64-bit seed. A `(seed, stream)` pair names one ChaCha8
//! substream; distinct stream ids of the same seed are independent. Replica
//! seeds are derived from a master seed with [`derive_seed`], which is the
//! documented splitting rule used by the CLI: replica `i` of a run with
//! master seed `s` uses `derive_seed(s, i)`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Deterministic RNG for `(seed, stream)`. Streams of the same seed are
/// independent ChaCha8 streams.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the sub-seed for replica `index` of master seed `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
