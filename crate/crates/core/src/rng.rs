//! Seed derivation.
//!
//! All randomness is drawn from ChaCha8 streams addressed by `(seed, stream)`.
//! Callers derive child seeds with [`derive_seed`] so that two consumers of
//! the same base seed (for example the explainer and the fidelity evaluator
//! for one instance) never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags that keep derived seeds of different consumers disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Explainer sampling for one evaluated instance.
    Explain = 1,
    /// Evaluation draws inside the fidelity ball.
    Evaluate = 2,
    /// Bootstrap and feature sampling of one forest tree.
    Tree = 3,
    /// Dataset shuffling and splitting.
    Split = 4,
    /// Boundary search steps.
    Boundary = 5,
    /// Surrogate sampling.
    Surrogate = 6,
    /// Instance subsampling in benchmarks.
    Select = 7,
}

/// The generator behind every random draw in the crate.
pub type Rng = ChaCha8Rng;

/// Opens stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes `(seed, domain, index)` into a fresh 64-bit seed.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    let mut h = splitmix(seed ^ splitmix(domain as u64));
    h = splitmix(h ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
