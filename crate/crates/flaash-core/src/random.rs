//! Seeded random tensor generation.
//!
//! Reproducibility is part of the contract: the same `(shape, density, seed)`
//! triple must produce bit-identical tensors on every platform, forever. The
//! generator is therefore pinned in this file rather than borrowed from a
//! library whose stream might change between versions.
//!
//! The stream is SplitMix64 (Steele, Lea & Flood's `splitmix64` finalizer):
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform doubles in `[0, 1)` take the top 53 bits: `(x >> 11) * 2^-53`.
//! Elements are visited in row-major order; each draws one double to decide
//! nonzero-ness (`u < density`), and nonzero elements then draw values
//! uniform in `[-1, 1)`, redrawing on an exact 0.0 so zeros are never stored.

use crate::shape::{DenseTensor, Shape};
use crate::{Error, Result};

/// Density and seed for random generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConfig {
    /// Probability that an individual element is nonzero, in (0, 1].
    pub density: f64,
    pub seed: u64,
}

impl DensityConfig {
    pub fn new(density: f64, seed: u64) -> Result<Self> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::DensityOutOfRange(density));
        }
        Ok(Self { density, seed })
    }
}

/// The pinned SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [-1, 1) excluding exact 0.0.
    pub fn next_value(&mut self) -> f64 {
        loop {
            let v = 2.0 * self.next_f64() - 1.0;
            if v != 0.0 {
                return v;
            }
        }
    }

    /// Uniform in [0, bound) by rejection, so every bound divides the draw
    /// space evenly.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}

/// Generates a dense tensor whose elements are independently nonzero with
/// probability `cfg.density`; nonzero values are uniform in [-1, 1).
pub fn random_tensor(shape: &Shape, cfg: &DensityConfig) -> Result<DenseTensor> {
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(Error::DensityOutOfRange(cfg.density));
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let mut dense = DenseTensor::zeros(shape.clone());
    for v in dense.values_mut() {
        if rng.next_f64() < cfg.density {
            *v = rng.next_value();
        }
    }
    Ok(dense)
}

/// Generates a dense tensor with exactly `nnz` nonzero elements at distinct
/// random positions. Used by sweeps that hold the entry count constant while
/// the volume changes.
pub fn random_tensor_with_nnz(shape: &Shape, nnz: usize, seed: u64) -> Result<DenseTensor> {
    let volume = shape.volume();
    if nnz > volume {
        return Err(Error::NnzExceedsVolume { nnz, volume });
    }
    let mut rng = SplitMix64::new(seed);
    let mut positions = std::collections::BTreeSet::new();
    while positions.len() < nnz {
        positions.insert(rng.next_below(volume as u64) as usize);
    }
    let mut dense = DenseTensor::zeros(shape.clone());
    let values = dense.values_mut();
    for p in positions {
        values[p] = rng.next_value();
    }
    Ok(dense)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix64_reference_stream() {
        // First outputs for seed 0, from the published splitmix64 reference
        // implementation.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(rng.next_u64(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(rng.next_u64(), 0x06c4_5d18_8009_454f);
    }

    #[test]
    fn full_density_fills_every_element() {
        let shape = Shape::new(vec![4, 5]).unwrap();
        let cfg = DensityConfig::new(1.0, 3).unwrap();
        let t = random_tensor(&shape, &cfg).unwrap();
        assert_eq!(t.nnz(), 20);
        assert!(t.values().iter().all(|v| (-1.0..1.0).contains(v)));
    }

    #[test]
    fn same_seed_reproduces_bit_identical_tensors() {
        let shape = Shape::new(vec![7, 9]).unwrap();
        let cfg = DensityConfig::new(0.3, 99).unwrap();
        let a = random_tensor(&shape, &cfg).unwrap();
        let b = random_tensor(&shape, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nnz_within_five_sigma_of_binomial_mean() {
        // Volume 10^4 at several densities and seeds.
        let shape = Shape::new(vec![100, 100]).unwrap();
        for density in [0.01, 0.1, 0.5] {
            for seed in 0..20u64 {
                let cfg = DensityConfig::new(density, seed).unwrap();
                let t = random_tensor(&shape, &cfg).unwrap();
                let n = shape.volume() as f64;
                let mean = density * n;
                let sigma = (n * density * (1.0 - density)).sqrt();
                let nnz = t.nnz() as f64;
                assert!(
                    (nnz - mean).abs() <= 5.0 * sigma,
                    "nnz {nnz} vs mean {mean} (sigma {sigma}) at density {density}, seed {seed}"
                );
            }
        }
    }

    #[test]
    fn invalid_density_is_rejected() {
        assert!(DensityConfig::new(0.0, 1).is_err());
        assert!(DensityConfig::new(1.5, 1).is_err());
        assert!(DensityConfig::new(-0.1, 1).is_err());
    }

    #[test]
    fn exact_nnz_generation() {
        let shape = Shape::new(vec![10, 10]).unwrap();
        for nnz in [0, 1, 17, 100] {
            let t = random_tensor_with_nnz(&shape, nnz, 5).unwrap();
            assert_eq!(t.nnz(), nnz);
        }
        assert!(random_tensor_with_nnz(&shape, 101, 5).is_err());
        // Deterministic.
        let a = random_tensor_with_nnz(&shape, 17, 5).unwrap();
        let b = random_tensor_with_nnz(&shape, 17, 5).unwrap();
        assert_eq!(a, b);
    }
}
