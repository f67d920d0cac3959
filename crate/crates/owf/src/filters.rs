//! Per-pixel weighted-average filters.
//!
//! Every variant estimates `f(x0)` as `sum w(x) Y(x)` over a square search
//! window around `x0`; they differ in how the weights are formed:
//!
//! | variant     | dissimilarity                                 | weights          |
//! |-------------|-----------------------------------------------|------------------|
//! | `Oracle`    | `|f(x) - f(x0)|` from a clean reference       | optimal (triangular) |
//! | `Owf`       | `(d_K(x, x0) - sqrt(2) sigma)+`               | optimal (triangular) |
//! | `OwfSplit`  | same, odd-parity patch pixels only            | optimal, even-parity search pixels only |
//! | `Nlm`       | `d_K(x, x0)^2` with a Gaussian patch kernel   | `exp(-d^2 / h^2)` |
//!
//! Output pixels are independent of each other, so rows are distributed over a
//! rayon pool. The result does not depend on the number of workers.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::grid::{window_offsets, GrayImage, PaddedImage, PixelCoord};
use crate::similarity::{noise_floor, PatchKernel, PixelParity, SimilarityKernel};
use crate::weights::{bandwidth_unsorted, triangular_weights, Bandwidth, WeightMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterVariant {
    Owf,
    OwfSplit,
    Oracle,
    Nlm,
}

impl FilterVariant {
    pub fn name(&self) -> &'static str {
        match self {
            FilterVariant::Owf => "owf",
            FilterVariant::OwfSplit => "owf-split",
            FilterVariant::Oracle => "oracle",
            FilterVariant::Nlm => "nlm",
        }
    }
}

impl fmt::Display for FilterVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "owf" => Ok(FilterVariant::Owf),
            "owf-split" => Ok(FilterVariant::OwfSplit),
            "oracle" => Ok(FilterVariant::Oracle),
            "nlm" => Ok(FilterVariant::Nlm),
            other => Err(invalid(format!("unknown filter {other:?}"))),
        }
    }
}

/// Filter parameters. Radii are in pixels: a radius `r` window has side `2r + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    /// Noise standard deviation in intensity units.
    pub sigma: f64,
    pub patch_radius: usize,
    pub search_radius: usize,
    /// Patch kernel for `Owf`. `OwfSplit` always compares patches with the
    /// rectangular kernel; `Nlm` uses this kernel if it is Gaussian and the
    /// default Gaussian otherwise.
    pub kernel: SimilarityKernel,
    pub variant: FilterVariant,
    /// Smoothing `h` of the NLM weights `exp(-d^2 / h^2)`.
    pub nlm_smoothing: f64,
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    /// Keep the per-pixel bandwidth map in the result.
    pub record_bandwidth: bool,
}

impl FilterConfig {
    /// 21x21 patches.
    pub const DEFAULT_PATCH_RADIUS: usize = 10;
    /// 13x13 search window.
    pub const DEFAULT_SEARCH_RADIUS: usize = 6;
    pub const DEFAULT_NLM_FACTOR: f64 = 0.55;

    /// OWF with the `K0` kernel, 21x21 patches and a 13x13 search window.
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            patch_radius: Self::DEFAULT_PATCH_RADIUS,
            search_radius: Self::DEFAULT_SEARCH_RADIUS,
            kernel: SimilarityKernel::K0,
            variant: FilterVariant::Owf,
            nlm_smoothing: Self::DEFAULT_NLM_FACTOR * sigma,
            threads: 0,
            record_bandwidth: false,
        }
    }

    pub fn with_variant(mut self, variant: FilterVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_kernel(mut self, kernel: SimilarityKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_patch_radius(mut self, radius: usize) -> Self {
        self.patch_radius = radius;
        self
    }

    pub fn with_search_radius(mut self, radius: usize) -> Self {
        self.search_radius = radius;
        self
    }

    pub fn with_nlm_smoothing(mut self, h: f64) -> Self {
        self.nlm_smoothing = h;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_bandwidth_map(mut self, record: bool) -> Self {
        self.record_bandwidth = record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive and finite, got {}", self.sigma)));
        }
        if self.search_radius < 1 {
            return Err(invalid("search radius must be at least 1"));
        }
        match self.variant {
            FilterVariant::Owf => self.kernel.validate(self.patch_radius)?,
            FilterVariant::OwfSplit if self.patch_radius < 1 => {
                return Err(invalid("the split filter needs a patch radius of at least 1"));
            }
            FilterVariant::Nlm => {
                if !(self.nlm_smoothing.is_finite() && self.nlm_smoothing > 0.0) {
                    return Err(invalid(format!(
                        "nlm smoothing must be positive, got {}",
                        self.nlm_smoothing
                    )));
                }
                self.nlm_kernel().validate(self.patch_radius)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn nlm_kernel(&self) -> SimilarityKernel {
        match self.kernel {
            k @ SimilarityKernel::Gauss { .. } => k,
            _ => SimilarityKernel::gauss_default(self.patch_radius),
        }
    }

    /// How far outside the image the filter reads.
    fn reach(&self) -> usize {
        match self.variant {
            FilterVariant::Oracle => self.search_radius,
            _ => self.search_radius + self.patch_radius,
        }
    }
}

/// Per-pixel bandwidths; `f64::INFINITY` marks a degenerate (all-zero) profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl BandwidthMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> Bandwidth {
        let a = self.values[row * self.width + col];
        if a.is_finite() {
            Bandwidth::Finite(a)
        } else {
            Bandwidth::Degenerate
        }
    }

    /// Raw values, row-major, with `inf` for degenerate pixels.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One line per image row, comma separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.values.chunks(self.width) {
            let line: Vec<String> = row
                .iter()
                .map(|a| if a.is_finite() { format!("{a}") } else { "inf".to_string() })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DenoiseResult {
    pub output: GrayImage,
    pub bandwidth: Option<BandwidthMap>,
}

/// The weights a filter uses at one pixel.
#[derive(Debug, Clone)]
pub struct WeightExport {
    pub center: PixelCoord,
    /// Image positions the weights apply to, before mirroring.
    pub coords: Vec<PixelCoord>,
    pub weights: WeightMap,
    /// `None` for the NLM baseline, which has no bandwidth.
    pub bandwidth: Option<Bandwidth>,
    /// `sum w(x) Y(x)`; equal to the filter output at `center`.
    pub estimate: f64,
}

enum Mode {
    /// Optimal weights from patch-based `rho_hat`.
    Patch { kernel: PatchKernel, flat: Vec<isize>, floor: f64 },
    /// Optimal weights from a clean reference.
    Oracle { guide: PaddedImage },
    /// Exponential weights of squared patch distances.
    Nlm { kernel: PatchKernel, flat: Vec<isize> },
}

struct Engine {
    noisy: PaddedImage,
    search: Vec<(isize, isize)>,
    search_flat: Vec<isize>,
    sigma2: f64,
    mode: Mode,
}

#[derive(Default)]
struct Scratch {
    rho: Vec<f64>,
    sorted: Vec<f64>,
    weights: Vec<f64>,
}

fn flat_offsets(offsets: &[(isize, isize)], stride: usize) -> Vec<isize> {
    offsets.iter().map(|&(dr, dc)| dr * stride as isize + dc).collect()
}

impl Engine {
    fn new(noisy: &GrayImage, clean: Option<&GrayImage>, cfg: &FilterConfig) -> Result<Self> {
        cfg.validate()?;
        let reach = cfg.reach();
        let padded = PaddedImage::new(noisy, reach)?;
        let stride = padded.stride();
        let search: Vec<(isize, isize)> = match cfg.variant {
            FilterVariant::OwfSplit => window_offsets(cfg.search_radius)
                .filter(|&(dr, dc)| PixelParity::of(dr, dc) == PixelParity::Even)
                .collect(),
            _ => window_offsets(cfg.search_radius).collect(),
        };
        let mode = match cfg.variant {
            FilterVariant::Owf | FilterVariant::OwfSplit => {
                let kernel = if cfg.variant == FilterVariant::Owf {
                    PatchKernel::new(cfg.kernel, cfg.patch_radius)?
                } else {
                    PatchKernel::with_parity(cfg.patch_radius, PixelParity::Odd)?
                };
                let flat = flat_offsets(&kernel.offsets, stride);
                Mode::Patch { kernel, flat, floor: noise_floor(cfg.sigma) }
            }
            FilterVariant::Oracle => {
                let clean = clean.ok_or_else(|| invalid("the oracle filter needs a clean reference image"))?;
                noisy.check_same_dims(clean)?;
                Mode::Oracle { guide: PaddedImage::new(clean, reach)? }
            }
            FilterVariant::Nlm => {
                let kernel = PatchKernel::new(cfg.nlm_kernel(), cfg.patch_radius)?;
                let flat = flat_offsets(&kernel.offsets, stride);
                Mode::Nlm { kernel, flat }
            }
        };
        Ok(Self {
            search_flat: flat_offsets(&search, stride),
            search,
            noisy: padded,
            sigma2: cfg.sigma * cfg.sigma,
            mode,
        })
    }

    /// Kernel-weighted mean squared difference of the patches at two flat indices.
    #[inline]
    fn patch_distance_sq(&self, kernel: &PatchKernel, flat: &[isize], x: usize, x0: usize) -> f64 {
        let data = self.noisy.data();
        let mut acc = 0.0;
        for (&off, &k) in flat.iter().zip(&kernel.weights) {
            let diff = data[(x as isize + off) as usize] - data[(x0 as isize + off) as usize];
            acc += k * (diff * diff);
        }
        acc / kernel.total
    }

    /// Fills `s.rho` with one dissimilarity per search offset. For NLM these
    /// are squared distances.
    fn dissimilarities(&self, center: usize, s: &mut Scratch) {
        s.rho.clear();
        match &self.mode {
            Mode::Patch { kernel, flat, floor } => {
                for &off in &self.search_flat {
                    let x = (center as isize + off) as usize;
                    let d = self.patch_distance_sq(kernel, flat, x, center).sqrt();
                    s.rho.push((d - floor).max(0.0));
                }
            }
            Mode::Oracle { guide } => {
                let g = guide.data();
                let f0 = g[center];
                s.rho.extend(self.search_flat.iter().map(|&off| (g[(center as isize + off) as usize] - f0).abs()));
            }
            Mode::Nlm { kernel, flat } => {
                for &off in &self.search_flat {
                    let x = (center as isize + off) as usize;
                    s.rho.push(self.patch_distance_sq(kernel, flat, x, center));
                }
            }
        }
    }

    /// Turns `s.rho` into normalized weights in `s.weights`; returns the
    /// bandwidth for the optimal-weight modes.
    fn weights(&self, s: &mut Scratch, inv_h2: f64) -> Option<Bandwidth> {
        let (bandwidth, total) = match self.mode {
            Mode::Nlm { .. } => {
                s.weights.clear();
                s.weights.extend(s.rho.iter().map(|&d2| (-d2 * inv_h2).exp()));
                (None, s.weights.iter().sum::<f64>())
            }
            _ => {
                let a = bandwidth_unsorted(&s.rho, self.sigma2, &mut s.sorted);
                let total = triangular_weights(&s.rho, a, &mut s.weights);
                (Some(a.map_or(Bandwidth::Degenerate, Bandwidth::Finite)), total)
            }
        };
        for w in &mut s.weights {
            *w /= total;
        }
        bandwidth
    }

    #[inline]
    fn average(&self, center: usize, weights: &[f64]) -> f64 {
        let data = self.noisy.data();
        weights
            .iter()
            .zip(&self.search_flat)
            .map(|(w, &off)| w * data[(center as isize + off) as usize])
            .sum()
    }

    fn estimate(&self, row: usize, col: usize, s: &mut Scratch, inv_h2: f64) -> (f64, Option<Bandwidth>) {
        let center = self.noisy.index(row as isize, col as isize);
        self.dissimilarities(center, s);
        let bw = self.weights(s, inv_h2);
        (self.average(center, &s.weights), bw)
    }
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(job))
}

fn nlm_inv_h2(h: f64) -> f64 {
    1.0 / (h * h)
}

fn run(noisy: &GrayImage, clean: Option<&GrayImage>, cfg: &FilterConfig) -> Result<DenoiseResult> {
    let engine = Engine::new(noisy, clean, cfg)?;
    let (w, h) = (noisy.width(), noisy.height());
    let inv_h2 = nlm_inv_h2(cfg.nlm_smoothing);
    let mut out = vec![0.0; w * h];
    let mut bw = vec![f64::INFINITY; w * h];
    with_pool(cfg.threads, || {
        out.par_chunks_mut(w)
            .zip(bw.par_chunks_mut(w))
            .enumerate()
            .for_each_init(Scratch::default, |s, (row, (out_row, bw_row))| {
                for col in 0..w {
                    let (v, b) = engine.estimate(row, col, s, inv_h2);
                    out_row[col] = v;
                    if let Some(Bandwidth::Finite(a)) = b {
                        bw_row[col] = a;
                    }
                }
            });
    })?;
    let bandwidth = (cfg.record_bandwidth && cfg.variant != FilterVariant::Nlm)
        .then_some(BandwidthMap { width: w, height: h, values: bw });
    Ok(DenoiseResult { output: GrayImage::new(w, h, out)?, bandwidth })
}

/// Runs the variant selected in `cfg`. `clean` is required for the oracle.
pub fn denoise(noisy: &GrayImage, clean: Option<&GrayImage>, cfg: &FilterConfig) -> Result<DenoiseResult> {
    run(noisy, clean, cfg)
}

/// Oracle filter: optimal weights computed from the true brightness
/// variation `|f(x) - f(x0)|` of a clean reference.
pub fn oracle_filter(noisy: &GrayImage, clean: &GrayImage, cfg: &FilterConfig) -> Result<DenoiseResult> {
    run(noisy, Some(clean), &cfg.clone().with_variant(FilterVariant::Oracle))
}

/// Optimal Weights Filter.
pub fn owf_denoise(noisy: &GrayImage, cfg: &FilterConfig) -> Result<DenoiseResult> {
    run(noisy, None, &cfg.clone().with_variant(FilterVariant::Owf))
}

/// Split-pixel OWF: dissimilarities from odd-parity patch pixels, averages
/// over even-parity search pixels.
pub fn owf_split_denoise(noisy: &GrayImage, cfg: &FilterConfig) -> Result<DenoiseResult> {
    run(noisy, None, &cfg.clone().with_variant(FilterVariant::OwfSplit))
}

/// Non-local means baseline with smoothing `cfg.nlm_smoothing`.
pub fn nlm_denoise(noisy: &GrayImage, cfg: &FilterConfig) -> Result<DenoiseResult> {
    run(noisy, None, &cfg.clone().with_variant(FilterVariant::Nlm))
}

/// NLM outputs for several smoothing values, computing patch distances once.
/// Each output is identical to [`nlm_denoise`] at that smoothing.
pub fn nlm_sweep(noisy: &GrayImage, cfg: &FilterConfig, smoothings: &[f64]) -> Result<Vec<GrayImage>> {
    let cfg = cfg.clone().with_variant(FilterVariant::Nlm);
    for &h in smoothings {
        cfg.clone().with_nlm_smoothing(h).validate()?;
    }
    let engine = Engine::new(noisy, None, &cfg)?;
    let (w, h) = (noisy.width(), noisy.height());
    let n = smoothings.len();
    let inv: Vec<f64> = smoothings.iter().map(|&h| nlm_inv_h2(h)).collect();
    // pixel-major: out[(row * w + col) * n + i]
    let mut out = vec![0.0; w * h * n];
    if n > 0 {
        with_pool(cfg.threads, || {
            out.par_chunks_mut(w * n)
                .enumerate()
                .for_each_init(Scratch::default, |s, (row, out_row)| {
                    for col in 0..w {
                        let center = engine.noisy.index(row as isize, col as isize);
                        engine.dissimilarities(center, s);
                        for (i, &inv_h2) in inv.iter().enumerate() {
                            engine.weights(s, inv_h2);
                            out_row[col * n + i] = engine.average(center, &s.weights);
                        }
                    }
                });
        })?;
    }
    (0..n)
        .map(|i| GrayImage::new(w, h, out.iter().skip(i).step_by(n).copied().collect()))
        .collect()
}

/// The weights the configured filter applies at `x0`.
pub fn export_weight_map(
    noisy: &GrayImage,
    clean: Option<&GrayImage>,
    cfg: &FilterConfig,
    x0: PixelCoord,
) -> Result<WeightExport> {
    if !noisy.contains(x0) {
        return Err(invalid(format!(
            "pixel {x0:?} is outside the {}x{} image",
            noisy.width(),
            noisy.height()
        )));
    }
    let engine = Engine::new(noisy, clean, cfg)?;
    let mut s = Scratch::default();
    let (estimate, bandwidth) =
        engine.estimate(x0.row as usize, x0.col as usize, &mut s, nlm_inv_h2(cfg.nlm_smoothing));
    Ok(WeightExport {
        center: x0,
        coords: engine.search.iter().map(|&(dr, dc)| x0.offset(dr, dc)).collect(),
        weights: WeightMap::from_normalized(s.weights),
        bandwidth,
        estimate,
    })
}
