//! Seeded additive white Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::grid::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("noise sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }
}

/// `clean + sigma * z`, one standard normal `z` per pixel drawn in row-major
/// order from a ChaCha8 stream seeded with `spec.seed`. Not clamped.
pub fn add_noise(clean: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    let spec = NoiseSpec::new(spec.sigma, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = clean
        .values()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + spec.sigma * z
        })
        .collect();
    GrayImage::new(clean.width(), clean.height(), values)
}
