//! MSE and PSNR against a reference image.

use std::fmt;

use crate::error::Result;
use crate::grid::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub mse: f64,
    /// `10 log10(255^2 / mse)`; `f64::INFINITY` for identical images.
    pub psnr_db: f64,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.psnr_db.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{:.4}", self.psnr_db)
        }
    }
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

pub fn compute_metrics(reference: &GrayImage, candidate: &GrayImage) -> Result<MetricsReport> {
    reference.check_same_dims(candidate)?;
    let sum: f64 = reference
        .values()
        .iter()
        .zip(candidate.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mse = sum / reference.len() as f64;
    Ok(MetricsReport { mse, psnr_db: psnr_from_mse(mse) })
}

/// Copy of `img` with values clamped to `[0, 255]`.
pub fn clamp_to_display_range(img: &GrayImage) -> GrayImage {
    img.map(|v| v.clamp(0.0, 255.0)).expect("clamping keeps values finite")
}
