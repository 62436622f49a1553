//! Seeded isotropic Gaussian mixtures.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64`, and normal deviates from `rand_distr::StandardNormal`.
//! Both are specified algorithms with no platform-dependent state, so a seed
//! reproduces the same matrix everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EmbeddingSet;

/// Derives an independent stream seed from a master seed (SplitMix64 finalizer).
pub fn child_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub mean: Vec<f64>,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub samples_per_mode: usize,
    pub dim: usize,
}

impl MixtureSpec {
    /// `n_modes` modes of common stddev whose means sit on scaled coordinate
    /// axes; modes `i < dim` are pairwise `separation * sqrt(2)` apart.
    pub fn separated(
        n_modes: usize,
        samples_per_mode: usize,
        dim: usize,
        separation: f64,
        stddev: f64,
        seed: u64,
    ) -> Self {
        let modes = (0..n_modes)
            .map(|i| {
                let mut mean = vec![0.0; dim];
                if let Some(ring) = i.checked_div(dim) {
                    mean[i % dim] = separation * (1 + ring) as f64;
                }
                Mode { mean, stddev }
            })
            .collect();
        Self {
            seed,
            modes,
            samples_per_mode,
            dim,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn total_samples(&self) -> usize {
        self.modes.len() * self.samples_per_mode
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Domain("mixture needs at least one mode".into()));
        }
        if self.dim == 0 || self.samples_per_mode == 0 {
            return Err(Error::Domain(
                "mixture dimension and samples per mode must be positive".into(),
            ));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if m.mean.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: m.mean.len(),
                });
            }
            if !(m.stddev > 0.0 && m.stddev.is_finite()) {
                return Err(Error::Domain(format!("mode {i}: stddev must be positive")));
            }
        }
        Ok(())
    }
}

/// Samples grouped by mode, with the mode index of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub set: EmbeddingSet<f64>,
    pub mode_of: Vec<usize>,
}

pub fn gen_mixture(spec: &MixtureSpec) -> Result<Mixture> {
    spec.validate()?;
    sample_modes(
        spec,
        &vec![spec.samples_per_mode; spec.modes.len()],
        spec.seed,
    )
}

/// Draws `counts[m]` samples from mode `m`, modes in order.
pub fn sample_modes(spec: &MixtureSpec, counts: &[usize], seed: u64) -> Result<Mixture> {
    spec.validate()?;
    if counts.len() != spec.modes.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.modes.len(),
            got: counts.len(),
        });
    }
    let mut rng = rng(seed);
    let total: usize = counts.iter().sum();
    let mut data = Vec::with_capacity(total * spec.dim);
    let mut mode_of = Vec::with_capacity(total);
    for (m, (mode, &count)) in spec.modes.iter().zip(counts).enumerate() {
        for _ in 0..count {
            for &mu in &mode.mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(mu + mode.stddev * z);
            }
            mode_of.push(m);
        }
    }
    let set = EmbeddingSet::new(format!("mixture(seed={seed})"), spec.dim, data)?;
    Ok(Mixture { set, mode_of })
}

/// Matrix of i.i.d. standard normal deviates with the shape of `like`.
pub fn standard_normal_like(like: &EmbeddingSet<f64>, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..like.as_slice().len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect()
}
