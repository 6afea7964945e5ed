//! Seeded randomness.
//!
//! Every random draw in the crate comes from xoshiro256++ seeded through
//! SplitMix64 (`seed_from_u64`), so a seed reproduces the same stream on any
//! platform. Uniforms use the 53-bit `[0, 1)` conversion from `rand`;
//! normals use the ziggurat sampler from `rand_distr`.

use rand::SeedableRng;
pub use rand_xoshiro::Xoshiro256PlusPlus as Rng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
