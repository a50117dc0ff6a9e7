//! Seed derivation and the random draws shared by every module.
//!
//! All randomness flows from a `u64` seed through [`derive_seed`], so any
//! quantity (a channel, a noise vector, one Monte Carlo trial) can be
//! regenerated in isolation regardless of evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent sub-streams of a trial seed.
pub mod stream {
    pub const CHANNEL: u64 = 0x01;
    pub const BITS: u64 = 0x02;
    pub const NOISE: u64 = 0x03;
    pub const ARTIFICIAL_NOISE: u64 = 0x04;
    pub const BOB: u64 = 0x10;
    pub const EVE: u64 = 0x11;
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `tag` of `seed`.
#[inline]
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(master, point as u64), trial as u64)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One circularly-symmetric complex Gaussian sample with `E|x|² = variance`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng, variance)).collect()
}
