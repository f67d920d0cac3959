//! Patch-based grayscale denoising with optimal weights.
//!
//! Each output pixel is a convex combination of the noisy pixels in a search
//! window around it. The Optimal Weights Filter chooses those weights by
//! minimizing an upper bound on the mean squared error, which has a closed-form
//! solution: a triangular kernel of the estimated brightness variation with a
//! bandwidth fixed by the noise level. No smoothing parameter needs tuning.
//!
//! ```
//! use owf::{add_noise, compute_metrics, owf_denoise, FilterConfig, GrayImage, NoiseSpec};
//!
//! let clean = GrayImage::from_fn(48, 48, |r, c| if r < 24 { 60.0 } else { 190.0 } + (c % 8) as f64)?;
//! let noisy = add_noise(&clean, &NoiseSpec::new(20.0, 1)?)?;
//! let cfg = FilterConfig::new(20.0).with_patch_radius(3).with_search_radius(5);
//! let denoised = owf_denoise(&noisy, &cfg)?.output;
//!
//! let before = compute_metrics(&clean, &noisy)?.psnr_db;
//! let after = compute_metrics(&clean, &denoised)?.psnr_db;
//! assert!(after > before + 5.0);
//! # Ok::<(), owf::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod filters;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod similarity;
pub mod weights;

pub use error::{Error, Result};
pub use filters::{
    denoise, export_weight_map, nlm_denoise, nlm_sweep, oracle_filter, owf_denoise, owf_split_denoise,
    BandwidthMap, DenoiseResult, FilterConfig, FilterVariant, WeightExport,
};
pub use grid::{window_pixels, GrayImage, PixelCoord, WindowSpec};
pub use io::{read_image, write_image, ImageIoError};
pub use metrics::{compute_metrics, MetricsReport};
pub use noise::{add_noise, NoiseSpec};
pub use similarity::{
    kernel_weight, parity_filter, patch_distance, rho_hat, split_rho_hat, PixelParity, SimilarityKernel,
};
pub use weights::{
    eval_m_rho, eval_objective, kkt_weights, optimal_weights, solve_bandwidth, triangular, Bandwidth,
    BandwidthSolution, KktWeights, RhoProfile, WeightMap,
};
