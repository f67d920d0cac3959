//! Published-value checks that need the standard test images in `data/`.
//! Skipped with a note when the image is missing.

use std::path::PathBuf;

use owf::metrics::clamp_to_display_range;
use owf::{add_noise, compute_metrics, oracle_filter, read_image, FilterConfig, FilterVariant, GrayImage, NoiseSpec};

fn load(name: &str) -> Option<GrayImage> {
    let dir = std::env::var_os("OWF_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")));
    match read_image(dir.join(format!("{name}.pgm"))) {
        Ok(img) => Some(img),
        Err(e) => {
            eprintln!("skipping: {e}");
            None
        }
    }
}

#[test]
fn oracle_on_lena_at_sigma_10() {
    let Some(lena) = load("lena") else { return };
    let cfg = FilterConfig::new(10.0).with_variant(FilterVariant::Oracle).with_search_radius(7);
    let mut total = 0.0;
    for seed in 1..=2 {
        let noisy = add_noise(&lena, &NoiseSpec::new(10.0, seed).unwrap()).unwrap();
        let out = oracle_filter(&noisy, &lena, &cfg).unwrap().output;
        total += compute_metrics(&lena, &clamp_to_display_range(&out)).unwrap().psnr_db;
    }
    let mean = total / 2.0;
    assert!((mean - 42.54).abs() <= 0.30, "{mean}");
}
