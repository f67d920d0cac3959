//! Benchmark runner: seeded noise, denoise, PSNR, one row per configuration.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::filters::{denoise, nlm_sweep, FilterConfig, FilterVariant};
use crate::grid::GrayImage;
use crate::io::{read_image, ImageIoError};
use crate::metrics::{clamp_to_display_range, compute_metrics};
use crate::noise::{add_noise, NoiseSpec};
use crate::similarity::SimilarityKernel;

/// A named clean image.
#[derive(Debug, Clone)]
pub struct BenchImage {
    pub name: String,
    pub image: GrayImage,
}

/// One filter configuration. Sides are window widths (odd).
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub variant: FilterVariant,
    pub kernel: SimilarityKernel,
    pub patch_side: usize,
    pub search_side: usize,
}

impl BenchCase {
    pub fn new(variant: FilterVariant, kernel: SimilarityKernel, patch_side: usize, search_side: usize) -> Self {
        Self { variant, kernel, patch_side, search_side }
    }

    /// Kernel label for reports; the split filter always compares with the
    /// rectangular kernel, NLM with a Gaussian one and the oracle with none.
    pub fn kernel_label(&self) -> &'static str {
        match self.variant {
            FilterVariant::Oracle => "none",
            FilterVariant::OwfSplit => "rect",
            FilterVariant::Nlm => "gauss",
            FilterVariant::Owf => self.kernel.name(),
        }
    }

    fn config(&self, sigma: f64, threads: usize) -> Result<FilterConfig> {
        for side in [self.patch_side, self.search_side] {
            if side % 2 == 0 {
                return Err(invalid(format!("window side {side} must be odd")));
            }
        }
        Ok(FilterConfig::new(sigma)
            .with_variant(self.variant)
            .with_kernel(self.kernel)
            .with_patch_radius(self.patch_side / 2)
            .with_search_radius(self.search_side / 2)
            .with_threads(threads))
    }
}

/// Oracle, OWF with each kernel, split OWF and NLM at 21x21 patches and a
/// 13x13 search window.
pub fn comparison_cases() -> Vec<BenchCase> {
    let gauss = SimilarityKernel::gauss_default(10);
    vec![
        BenchCase::new(FilterVariant::Oracle, SimilarityKernel::Rect, 21, 13),
        BenchCase::new(FilterVariant::Owf, SimilarityKernel::Rect, 21, 13),
        BenchCase::new(FilterVariant::Owf, gauss, 21, 13),
        BenchCase::new(FilterVariant::Owf, SimilarityKernel::K0, 21, 13),
        BenchCase::new(FilterVariant::OwfSplit, SimilarityKernel::Rect, 21, 13),
        BenchCase::new(FilterVariant::Nlm, gauss, 21, 13),
    ]
}

/// OWF with `K0` over patch sides 11..=21 and search sides 11..=17.
pub fn grid_cases() -> Vec<BenchCase> {
    let mut cases = Vec::new();
    for search in (11..=17).step_by(2) {
        for patch in (11..=21).step_by(2) {
            cases.push(BenchCase::new(FilterVariant::Owf, SimilarityKernel::K0, patch, search));
        }
    }
    cases
}

/// The comparison cases followed by the rest of the `K0` grid.
pub fn default_cases() -> Vec<BenchCase> {
    let mut cases = comparison_cases();
    for case in grid_cases() {
        if !cases.contains(&case) {
            cases.push(case);
        }
    }
    cases
}

/// NLM smoothing factors 0.30, 0.35, ..., 1.50 (multiples of sigma).
pub fn nlm_smoothing_factors() -> Vec<f64> {
    (0..=24).map(|i| (30 + 5 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub sigmas: Vec<f64>,
    pub cases: Vec<BenchCase>,
    pub seed: u64,
    /// NLM rows report the best PSNR over `factor * sigma` for these factors.
    pub nlm_factors: Vec<f64>,
    /// Worker threads per filter run; 0 uses the global pool.
    pub threads: usize,
    /// Record wall time. With timing off the `seconds` column is 0 and the
    /// report is a pure function of the inputs.
    pub timing: bool,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            sigmas: vec![10.0, 20.0, 30.0],
            cases: default_cases(),
            seed: 0,
            nlm_factors: nlm_smoothing_factors(),
            threads: 0,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub sigma: f64,
    pub filter: FilterVariant,
    pub kernel: String,
    /// `None` for the oracle, which compares no patches.
    pub patch: Option<usize>,
    pub search: usize,
    pub psnr_db: f64,
    pub seconds: f64,
    /// Best NLM smoothing, for NLM rows.
    pub nlm_smoothing: Option<f64>,
}

fn canonical(a: &BenchRow, b: &BenchRow) -> Ordering {
    a.image
        .cmp(&b.image)
        .then(a.sigma.total_cmp(&b.sigma))
        .then(a.filter.cmp(&b.filter))
        .then(a.kernel.cmp(&b.kernel))
        .then(a.patch.cmp(&b.patch))
        .then(a.search.cmp(&b.search))
}

fn run_case(img: &BenchImage, noisy: &GrayImage, sigma: f64, case: &BenchCase, plan: &BenchPlan) -> Result<BenchRow> {
    let cfg = case.config(sigma, plan.threads)?;
    let start = Instant::now();
    let (psnr_db, nlm_smoothing) = if case.variant == FilterVariant::Nlm {
        let hs: Vec<f64> = plan.nlm_factors.iter().map(|f| f * sigma).collect();
        if hs.is_empty() {
            return Err(invalid("NLM rows need at least one smoothing factor"));
        }
        let outs = nlm_sweep(noisy, &cfg, &hs)?;
        let mut best = (f64::NEG_INFINITY, hs[0]);
        for (out, &h) in outs.iter().zip(&hs) {
            let p = compute_metrics(&img.image, &clamp_to_display_range(out))?.psnr_db;
            if p > best.0 {
                best = (p, h);
            }
        }
        (best.0, Some(best.1))
    } else {
        let out = denoise(noisy, Some(&img.image), &cfg)?.output;
        (compute_metrics(&img.image, &clamp_to_display_range(&out))?.psnr_db, None)
    };
    let seconds = if plan.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    Ok(BenchRow {
        image: img.name.clone(),
        sigma,
        filter: case.variant,
        kernel: case.kernel_label().to_string(),
        patch: (case.variant != FilterVariant::Oracle).then_some(case.patch_side),
        search: case.search_side,
        psnr_db,
        seconds,
        nlm_smoothing,
    })
}

/// Runs every (image, sigma, case) combination. Each (image, sigma) pair
/// gets one noise realization shared by all cases. Rows come back in a fixed
/// order regardless of scheduling.
pub fn run_bench(corpus: &[BenchImage], plan: &BenchPlan) -> Result<Vec<BenchRow>> {
    if corpus.is_empty() {
        return Err(invalid("benchmark corpus is empty"));
    }
    let noisy: Vec<(usize, f64, GrayImage)> = corpus
        .iter()
        .enumerate()
        .flat_map(|(i, img)| plan.sigmas.iter().map(move |&s| (i, s, img)))
        .map(|(i, s, img)| Ok((i, s, add_noise(&img.image, &NoiseSpec::new(s, plan.seed)?)?)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(&(usize, f64, GrayImage), &BenchCase)> =
        noisy.iter().flat_map(|n| plan.cases.iter().map(move |c| (n, c))).collect();
    let mut rows = jobs
        .par_iter()
        .map(|((i, sigma, noisy), case)| run_case(&corpus[*i], noisy, *sigma, case, plan))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(canonical);
    Ok(rows)
}

pub const CSV_HEADER: [&str; 8] = ["image", "sigma", "filter", "kernel", "patch", "search", "psnr_db", "seconds"];

pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.image.clone(),
            format!("{}", r.sigma),
            r.filter.name().to_string(),
            r.kernel.clone(),
            r.patch.map(|p| p.to_string()).unwrap_or_default(),
            r.search.to_string(),
            format!("{:.4}", r.psnr_db),
            format!("{:.3}", r.seconds),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Aligned plain-text rendering of the rows.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>6} {:<10} {:<6} {:>7} {:>7} {:>9} {:>8}",
        "image", "sigma", "filter", "kernel", "m", "M", "PSNR(dB)", "seconds"
    );
    for r in rows {
        let m = r.patch.map(|p| format!("{p}x{p}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<12} {:>6} {:<10} {:<6} {:>7} {:>7} {:>9.2} {:>8.2}",
            r.image,
            r.sigma,
            r.filter.name(),
            r.kernel,
            m,
            format!("{0}x{0}", r.search),
            r.psnr_db,
            r.seconds
        );
    }
    s
}

/// A corpus file that could not be decoded.
pub type LoadFailure = (PathBuf, ImageIoError);

/// Loads every `.pgm` / `.png` file in `dir`, sorted by name. Files that fail
/// to decode are returned separately instead of aborting the load.
pub fn load_corpus(dir: impl AsRef<Path>) -> std::io::Result<(Vec<BenchImage>, Vec<LoadFailure>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    let mut images = Vec::new();
    let mut failures = Vec::new();
    for path in paths {
        match read_image(&path) {
            Ok(image) => {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                images.push(BenchImage { name, image });
            }
            Err(e) => failures.push((path, e)),
        }
    }
    Ok((images, failures))
}
