//! Seeded random streams.
//!
//! Every stochastic component draws from its own ChaCha stream derived from
//! one seed, so adding draws in one component never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    CoveragePool = 2,
    Election = 3,
    SinkPolicy = 4,
    CbPolicy = 5,
    PhaseError = 6,
    Selection = 7,
}

pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Stream keyed by an extra index, e.g. one sample pool per node.
pub fn indexed_stream(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mixed = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.set_stream(stream as u64);
    rng
}
