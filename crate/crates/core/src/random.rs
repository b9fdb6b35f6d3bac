//! Seeded sampling. Every draw is a pure function of its dimensions and a [`Seed`].
//!
//! Streams come from ChaCha8 seeded with the 64-bit seed value, so identical
//! seeds produce bit-identical samples on every platform.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::error::{Error, Result};
use crate::vector::{self, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Seed(pub u64);

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// Child seed for a tagged sub-stream.
    ///
    /// `h₀ = mix(seed + φ)`, then `hᵢ₊₁ = mix(hᵢ ⊕ mix(tagᵢ + (i+1)·φ))` with
    /// `φ = 0x9E3779B97F4A7C15` and `mix` the SplitMix64 finalizer. Tags are
    /// position-sensitive, so `(1, 2)` and `(2, 1)` give different streams.
    pub fn derive(self, tags: &[u64]) -> Seed {
        let mut h = mix64(self.0.wrapping_add(GOLDEN));
        for (i, &t) in tags.iter().enumerate() {
            let salt = GOLDEN.wrapping_mul(i as u64 + 1);
            h = mix64(h ^ mix64(t.wrapping_add(salt)));
        }
        Seed(h)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Draws one circularly-symmetric complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

/// `n` i.i.d. circularly-symmetric complex Gaussians, real and imaginary parts
/// each of variance 1/2.
pub fn sample_complex_gaussian(n: usize, seed: Seed) -> Result<Vec<C64>> {
    if n == 0 {
        return Err(Error::invalid("sample length must be at least 1"));
    }
    let mut rng = seed.rng();
    Ok((0..n).map(|_| complex_gaussian(&mut rng)).collect())
}

/// A point uniformly distributed on the complex unit sphere in `Cⁿ`.
pub fn sample_unit_sphere(n: usize, seed: Seed) -> Result<Vec<C64>> {
    let mut v = sample_complex_gaussian(n, seed)?;
    // a Gaussian draw of exactly zero has probability zero; redraw anyway
    let mut retry = 0u64;
    while vector::norm2(&v) == 0.0 {
        retry += 1;
        v = sample_complex_gaussian(n, seed.derive(&[retry]))?;
    }
    vector::normalize(&mut v);
    Ok(v)
}

/// Unit-modulus complex number with uniform phase.
pub fn uniform_phase<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    math::cis(rng.random::<f64>() * 2.0 * core::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism() {
        let a = sample_complex_gaussian(32, Seed(5)).unwrap();
        let b = sample_complex_gaussian(32, Seed(5)).unwrap();
        assert_eq!(a, b);
        let c = sample_complex_gaussian(32, Seed(6)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_length_rejected() {
        assert!(sample_complex_gaussian(0, Seed(1)).is_err());
        assert!(sample_unit_sphere(0, Seed(1)).is_err());
    }

    #[test]
    fn mean_modulus_squared_is_one() {
        let v = sample_complex_gaussian(100_000, Seed(11)).unwrap();
        let mean = vector::norm2_sqr(&v) / v.len() as f64;
        assert!((mean - 1.0).abs() < 0.03, "mean |z|² = {mean}");
    }

    #[test]
    fn normalized_gaussian_is_unit() {
        let mut v = sample_complex_gaussian(300, Seed(2)).unwrap();
        vector::normalize(&mut v);
        assert!((vector::norm2(&v) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sphere_samples() {
        let v = sample_unit_sphere(1, Seed(0)).unwrap();
        assert!((v[0].norm() - 1.0).abs() <= 1e-12);
        let w = sample_unit_sphere(625, Seed(1)).unwrap();
        assert!((vector::norm2(&w) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn independent_sphere_samples_are_nearly_orthogonal() {
        let n = 625;
        let bound = 5.0 / (n as f64).sqrt();
        let hits = (0..100u64)
            .filter(|&i| {
                let a = sample_unit_sphere(n, Seed(1000 + 2 * i)).unwrap();
                let b = sample_unit_sphere(n, Seed(1001 + 2 * i)).unwrap();
                vector::dot(&a, &b).norm() < bound
            })
            .count();
        // P(|⟨a,b⟩| ≥ 5/√n) = exp(-25) per pair
        assert_eq!(hits, 100);
    }

    #[test]
    fn derived_seeds_are_position_sensitive() {
        let s = Seed(42);
        assert_ne!(s.derive(&[1, 2]), s.derive(&[2, 1]));
        assert_ne!(s.derive(&[]), s);
        assert_eq!(s.derive(&[3]), Seed(42).derive(&[3]));
    }
}
