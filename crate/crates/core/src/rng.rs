//! Random number plumbing shared by the swarm and the harness.
//!
//! Every run owns one [`SwarmRng`] stream (ChaCha8, seeded through
//! `seed_from_u64`), so a run is reproducible bit-for-bit from its seed on
//! any platform. Harness seeds for individual runs come from [`mix_seed`].

use rand::distributions::{Distribution, Standard};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;

/// The generator used for every solver run.
pub type SwarmRng = ChaCha8Rng;

/// Creates the stream for one run.
pub fn run_rng(seed: u64) -> SwarmRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Source of uniform draws in `[0, 1)`.
///
/// Blanket-implemented for every [`RngCore`]; [`ConstantDraw`] replaces the
/// stream with a fixed value when a computation has to be replayed by hand.
pub trait UnitDraw {
    fn unit(&mut self) -> f64;
}

impl<R: RngCore + ?Sized> UnitDraw for R {
    #[inline]
    fn unit(&mut self) -> f64 {
        Standard.sample(self)
    }
}

/// Returns the same value for every draw.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDraw(pub f64);

impl UnitDraw for ConstantDraw {
    #[inline]
    fn unit(&mut self) -> f64 {
        self.0
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` of algorithm `algorithm` on dataset `dataset`.
///
/// `h0 = splitmix64(base)`, then `h ← splitmix64(h ^ index)` folded over
/// `(algorithm, dataset, run)` in that order. This derivation is part of the
/// report format: changing it changes every published seed.
pub fn mix_seed(base: u64, algorithm: usize, dataset: usize, run: usize) -> u64 {
    [algorithm as u64, dataset as u64, run as u64]
        .into_iter()
        .fold(splitmix64(base), |h, idx| splitmix64(h ^ idx))
}
