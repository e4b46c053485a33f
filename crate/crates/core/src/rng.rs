//! Seeded, portable randomness.
//!
//! Every stochastic stage draws from its own ChaCha stream derived from the
//! run seed, so adding a stage or reordering parallel work never perturbs
//! another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SearchRng = ChaCha8Rng;

/// Independent random streams used by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    InitialSet,
    Step1,
    RandomSet,
    ReferenceInvalid,
    /// Step-2 walks for the mutator preset at the given position.
    Step2 {
        preset: u32,
    },
    /// Free-form stream for callers outside the pipeline.
    Custom(u32),
}

impl Stream {
    fn id(self) -> u32 {
        match self {
            Stream::InitialSet => 1,
            Stream::Step1 => 2,
            Stream::RandomSet => 3,
            Stream::ReferenceInvalid => 4,
            Stream::Step2 { preset } => 0x100 + preset,
            Stream::Custom(n) => 0x1_0000 + n,
        }
    }
}

/// Returns the generator for `(seed, stream, index)`.
pub fn derive(seed: u64, stream: Stream, index: u32) -> SearchRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream.id() as u64) << 32) | index as u64);
    rng
}
