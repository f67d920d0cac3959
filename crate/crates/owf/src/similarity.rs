//! Patch distances and brightness-variation estimates.
//!
//! The distance between the patches around `x` and `x0` is the kernel-weighted
//! root mean square of their pixelwise differences:
//!
//! ```text
//! d_K(x, x0)^2 = sum_z K(z) (Y(x + z) - Y(x0 + z))^2 / sum_z K(z)
//! ```
//!
//! With the rectangular kernel this is the plain RMS distance. Subtracting the
//! noise floor `sqrt(2) * sigma` and clamping at zero gives the estimate `rho_hat`
//! of `|f(x) - f(x0)|` that drives the optimal weights.

use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};
use crate::grid::{window_offsets, GrayImage, PixelCoord};

/// Weighting of patch pixels when comparing two patches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimilarityKernel {
    /// Every patch pixel counts equally.
    Rect,
    /// `exp(-|z|^2 / (2 * bandwidth))`, with `|z|` the Euclidean offset in pixels.
    Gauss { bandwidth: f64 },
    /// Sum of nested box kernels: `sum_{k = max(|z|_inf, 1)}^{p} 1 / (2k + 1)^2`,
    /// where `p` is the patch radius.
    K0,
}

impl SimilarityKernel {
    /// Gaussian kernel with the default bandwidth `patch_radius^2` (at least 1).
    pub fn gauss_default(patch_radius: usize) -> Self {
        SimilarityKernel::Gauss { bandwidth: (patch_radius * patch_radius).max(1) as f64 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimilarityKernel::Rect => "rect",
            SimilarityKernel::Gauss { .. } => "gauss",
            SimilarityKernel::K0 => "k0",
        }
    }

    pub(crate) fn validate(&self, patch_radius: usize) -> Result<()> {
        match *self {
            SimilarityKernel::Rect => Ok(()),
            SimilarityKernel::Gauss { bandwidth } if bandwidth.is_finite() && bandwidth > 0.0 => Ok(()),
            SimilarityKernel::Gauss { bandwidth } => {
                Err(invalid(format!("gaussian kernel bandwidth must be positive, got {bandwidth}")))
            }
            SimilarityKernel::K0 if patch_radius >= 1 => Ok(()),
            SimilarityKernel::K0 => Err(invalid("the k0 kernel needs a patch radius of at least 1")),
        }
    }
}

/// Which half of the checkerboard split to keep, by the parity of the
/// coordinate sum of an offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelParity {
    Even,
    Odd,
}

impl PixelParity {
    pub fn of(drow: isize, dcol: isize) -> Self {
        if (drow + dcol).rem_euclid(2) == 0 {
            PixelParity::Even
        } else {
            PixelParity::Odd
        }
    }
}

/// Unnormalized kernel weight of patch pixel `offset` in the patch at `center`.
pub fn kernel_weight(
    kernel: SimilarityKernel,
    offset: PixelCoord,
    center: PixelCoord,
    patch_radius: usize,
) -> Result<f64> {
    kernel.validate(patch_radius)?;
    let dist = offset.chebyshev(center);
    if dist > patch_radius {
        return Err(invalid(format!(
            "offset {offset:?} lies outside the radius-{patch_radius} patch at {center:?}"
        )));
    }
    Ok(weight_at(kernel, offset.row - center.row, offset.col - center.col, patch_radius))
}

fn weight_at(kernel: SimilarityKernel, drow: isize, dcol: isize, patch_radius: usize) -> f64 {
    match kernel {
        SimilarityKernel::Rect => 1.0,
        SimilarityKernel::Gauss { bandwidth } => {
            let sq = (drow * drow + dcol * dcol) as f64;
            (-sq / (2.0 * bandwidth)).exp()
        }
        SimilarityKernel::K0 => {
            let start = drow.unsigned_abs().max(dcol.unsigned_abs()).max(1);
            (start..=patch_radius).map(|k| 1.0 / ((2 * k + 1) * (2 * k + 1)) as f64).sum()
        }
    }
}

/// Patch offsets with their kernel weights, in row-major order.
#[derive(Debug, Clone)]
pub(crate) struct PatchKernel {
    pub(crate) offsets: Vec<(isize, isize)>,
    pub(crate) weights: Vec<f64>,
    pub(crate) total: f64,
}

impl PatchKernel {
    pub(crate) fn new(kernel: SimilarityKernel, patch_radius: usize) -> Result<Self> {
        kernel.validate(patch_radius)?;
        let offsets: Vec<_> = window_offsets(patch_radius).collect();
        let weights: Vec<f64> = offsets
            .iter()
            .map(|&(dr, dc)| weight_at(kernel, dr, dc, patch_radius))
            .collect();
        let total = weights.iter().sum();
        Ok(Self { offsets, weights, total })
    }

    /// Rectangular kernel restricted to offsets of the given parity.
    pub(crate) fn with_parity(patch_radius: usize, parity: PixelParity) -> Result<Self> {
        let offsets: Vec<_> = window_offsets(patch_radius)
            .filter(|&(dr, dc)| PixelParity::of(dr, dc) == parity)
            .collect();
        if offsets.is_empty() {
            return Err(invalid(format!(
                "a radius-{patch_radius} patch has no {parity:?}-parity pixels"
            )));
        }
        let weights = vec![1.0; offsets.len()];
        let total = offsets.len() as f64;
        Ok(Self { offsets, weights, total })
    }

    /// Squared distance with mirrored reads.
    fn distance_sq(&self, img: &GrayImage, x: PixelCoord, x0: PixelCoord) -> Result<f64> {
        let mut acc = 0.0;
        for (&(dr, dc), &k) in self.offsets.iter().zip(&self.weights) {
            let diff = img.mirror_read(x.offset(dr, dc))? - img.mirror_read(x0.offset(dr, dc))?;
            acc += k * (diff * diff);
        }
        Ok(acc / self.total)
    }
}

/// `(d - sqrt(2) sigma)+`.
#[inline]
pub(crate) fn clamp_noise_floor(distance: f64, floor: f64) -> f64 {
    (distance - floor).max(0.0)
}

pub(crate) fn noise_floor(sigma: f64) -> f64 {
    SQRT_2 * sigma
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("sigma must be positive and finite, got {sigma}")))
    }
}

/// Kernel-weighted RMS distance between the patches centered at `x` and `x0`.
pub fn patch_distance(
    img: &GrayImage,
    x: PixelCoord,
    x0: PixelCoord,
    patch_radius: usize,
    kernel: SimilarityKernel,
) -> Result<f64> {
    let pk = PatchKernel::new(kernel, patch_radius)?;
    Ok(pk.distance_sq(img, x, x0)?.sqrt())
}

/// Estimated brightness variation `(d_K(x, x0) - sqrt(2) sigma)+`.
pub fn rho_hat(
    img: &GrayImage,
    x: PixelCoord,
    x0: PixelCoord,
    patch_radius: usize,
    kernel: SimilarityKernel,
    sigma: f64,
) -> Result<f64> {
    check_sigma(sigma)?;
    let d = patch_distance(img, x, x0, patch_radius, kernel)?;
    Ok(clamp_noise_floor(d, noise_floor(sigma)))
}

/// Brightness-variation estimate computed from the odd-parity patch pixels
/// only, as used by the split filter.
pub fn split_rho_hat(
    img: &GrayImage,
    x: PixelCoord,
    x0: PixelCoord,
    patch_radius: usize,
    sigma: f64,
) -> Result<f64> {
    check_sigma(sigma)?;
    let pk = PatchKernel::with_parity(patch_radius, PixelParity::Odd)?;
    let d = pk.distance_sq(img, x, x0)?.sqrt();
    Ok(clamp_noise_floor(d, noise_floor(sigma)))
}

/// Keeps the coordinates whose offset from `origin` has the requested parity.
pub fn parity_filter(coords: &[PixelCoord], origin: PixelCoord, parity: PixelParity) -> Vec<PixelCoord> {
    coords
        .iter()
        .copied()
        .filter(|p| PixelParity::of(p.row - origin.row, p.col - origin.col) == parity)
        .collect()
}

/// Odd-parity offsets of a patch, in row-major order.
pub fn split_patch_offsets(patch_radius: usize) -> Vec<(isize, isize)> {
    window_offsets(patch_radius)
        .filter(|&(dr, dc)| PixelParity::of(dr, dc) == PixelParity::Odd)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{window_pixels, WindowSpec};

    fn p(r: isize, c: isize) -> PixelCoord {
        PixelCoord::new(r, c)
    }

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |r, c| (3 * r + 7 * c) as f64).unwrap()
    }

    #[test]
    fn kernel_weight_examples() {
        assert_eq!(kernel_weight(SimilarityKernel::Rect, p(3, 4), p(2, 3), 2).unwrap(), 1.0);
        assert_eq!(kernel_weight(SimilarityKernel::K0, p(1, 0), p(0, 0), 1).unwrap(), 1.0 / 9.0);
        assert_eq!(kernel_weight(SimilarityKernel::K0, p(0, 0), p(0, 0), 1).unwrap(), 1.0 / 9.0);
        let g = SimilarityKernel::Gauss { bandwidth: 4.0 };
        assert_eq!(kernel_weight(g, p(5, 5), p(5, 5), 3).unwrap(), 1.0);
        assert_eq!(kernel_weight(g, p(5, 7), p(5, 5), 3).unwrap(), (-0.5f64).exp());
    }

    #[test]
    fn k0_matches_nested_boxes() {
        // at radius 2: distance 2 -> 1/25, distance 1 -> 1/9 + 1/25, center same as distance 1
        let k = SimilarityKernel::K0;
        assert_eq!(kernel_weight(k, p(2, -1), p(0, 0), 2).unwrap(), 1.0 / 25.0);
        let inner = 1.0 / 9.0 + 1.0 / 25.0;
        assert_eq!(kernel_weight(k, p(1, 1), p(0, 0), 2).unwrap(), inner);
        assert_eq!(kernel_weight(k, p(0, 0), p(0, 0), 2).unwrap(), inner);
    }

    #[test]
    fn kernel_weight_rejects_bad_input() {
        assert!(kernel_weight(SimilarityKernel::Rect, p(3, 0), p(0, 0), 2).is_err());
        assert!(kernel_weight(SimilarityKernel::K0, p(0, 0), p(0, 0), 0).is_err());
        let bad = SimilarityKernel::Gauss { bandwidth: 0.0 };
        assert!(kernel_weight(bad, p(0, 0), p(0, 0), 1).is_err());
    }

    #[test]
    fn distance_to_self_is_zero() {
        let img = ramp(9, 9);
        for k in [SimilarityKernel::Rect, SimilarityKernel::K0, SimilarityKernel::gauss_default(2)] {
            assert_eq!(patch_distance(&img, p(4, 4), p(4, 4), 2, k).unwrap(), 0.0);
            assert_eq!(rho_hat(&img, p(0, 8), p(0, 8), 2, k, 5.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_gap_gives_gap() {
        // left half 10, right half 30: patches well inside each half differ by 20
        let img = GrayImage::from_fn(20, 8, |_, c| if c < 10 { 10.0 } else { 30.0 }).unwrap();
        let d = patch_distance(&img, p(4, 15), p(4, 3), 1, SimilarityKernel::Rect).unwrap();
        assert_eq!(d, 20.0);
        let sigma = 5.0;
        let r = rho_hat(&img, p(4, 15), p(4, 3), 1, SimilarityKernel::Rect, sigma).unwrap();
        assert!((r - (20.0 - SQRT_2 * sigma)).abs() < 1e-12);
        let r = split_rho_hat(&img, p(4, 15), p(4, 3), 1, sigma).unwrap();
        assert!((r - (20.0 - SQRT_2 * sigma)).abs() < 1e-12);
        // under the noise floor everything clamps to zero
        assert_eq!(rho_hat(&img, p(4, 15), p(4, 3), 1, SimilarityKernel::Rect, 15.0).unwrap(), 0.0);
    }

    #[test]
    fn single_pixel_gap_is_a_third() {
        let mut v = vec![50.0; 49];
        v[3 * 7 + 3] = 62.0;
        let img = GrayImage::new(7, 7, v).unwrap();
        // only the patch at (3,3) holds the spike
        let d = patch_distance(&img, p(3, 3), p(0, 3), 1, SimilarityKernel::Rect).unwrap();
        assert!((d - 12.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn split_uses_four_odd_offsets_in_3x3() {
        assert_eq!(split_patch_offsets(1), vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        assert_eq!(split_patch_offsets(10).len(), 220);
        let img = ramp(6, 6);
        assert!(split_rho_hat(&img, p(2, 2), p(2, 3), 0, 1.0).is_err());
        assert_eq!(split_rho_hat(&img, p(2, 2), p(2, 2), 1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn parity_partition() {
        let win = window_pixels(WindowSpec::new(p(7, 3), 1));
        let even = parity_filter(&win, p(7, 3), PixelParity::Even);
        let odd = parity_filter(&win, p(7, 3), PixelParity::Odd);
        assert_eq!(even.len(), 5);
        assert_eq!(odd.len(), 4);
        assert!(even.contains(&p(7, 3)) && even.contains(&p(6, 2)) && even.contains(&p(8, 4)));
        let mut joined = [even, odd].concat();
        joined.sort();
        let mut all = win.clone();
        all.sort();
        assert_eq!(joined, all);
        let search = window_pixels(WindowSpec::new(p(0, 0), 6));
        assert_eq!(parity_filter(&search, p(0, 0), PixelParity::Even).len(), 85);
    }

    #[test]
    fn rect_patch_distance_is_plain_rms() {
        let img = GrayImage::from_fn(12, 12, |r, c| ((r * 31 + c * 17) % 23) as f64).unwrap();
        let (x, x0) = (p(5, 6), p(3, 2));
        let mut acc = 0.0;
        for (dr, dc) in window_offsets(2) {
            let diff = img.mirror_read(x.offset(dr, dc)).unwrap() - img.mirror_read(x0.offset(dr, dc)).unwrap();
            acc += diff * diff;
        }
        let want = (acc / 25.0).sqrt();
        assert_eq!(patch_distance(&img, x, x0, 2, SimilarityKernel::Rect).unwrap(), want);
    }
}
