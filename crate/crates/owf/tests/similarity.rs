use owf::similarity::split_patch_offsets;
use owf::{patch_distance, rho_hat, GrayImage, PixelCoord, SimilarityKernel};
use proptest::prelude::*;

const SIDE: usize = 20;

fn image(values: &[f64]) -> GrayImage {
    GrayImage::new(SIDE, SIDE, values.to_vec()).unwrap()
}

fn coord() -> impl Strategy<Value = PixelCoord> {
    (0..SIDE as isize, 0..SIDE as isize).prop_map(|(r, c)| PixelCoord::new(r, c))
}

fn kernel() -> impl Strategy<Value = SimilarityKernel> {
    prop_oneof![
        Just(SimilarityKernel::Rect),
        Just(SimilarityKernel::K0),
        (0.5..20.0f64).prop_map(|bandwidth| SimilarityKernel::Gauss { bandwidth }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric(
        v in prop::collection::vec(0.0..255.0f64, SIDE * SIDE),
        x in coord(), y in coord(), r in 1usize..4, k in kernel(),
    ) {
        let img = image(&v);
        prop_assert_eq!(
            patch_distance(&img, x, y, r, k).unwrap(),
            patch_distance(&img, y, x, r, k).unwrap()
        );
    }

    #[test]
    fn rect_distance_is_a_metric(
        v in prop::collection::vec(0.0..255.0f64, SIDE * SIDE),
        x in coord(), y in coord(), z in coord(), r in 0usize..4,
    ) {
        let img = image(&v);
        let d = |a, b| patch_distance(&img, a, b, r, SimilarityKernel::Rect).unwrap();
        prop_assert!(d(x, y) >= 0.0);
        prop_assert_eq!(d(x, x), 0.0);
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
    }

    #[test]
    fn constant_offset_changes_nothing(
        v in prop::collection::vec(0.0..255.0f64, SIDE * SIDE),
        x in coord(), y in coord(), r in 1usize..4, k in kernel(), shift in -500.0..500.0f64,
    ) {
        let img = image(&v);
        let shifted = img.map(|p| p + shift).unwrap();
        let before = rho_hat(&img, x, y, r, k, 10.0).unwrap();
        let after = rho_hat(&shifted, x, y, r, k, 10.0).unwrap();
        prop_assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn rho_hat_respects_the_holder_bound(
        slope_r in -20.0..20.0f64, slope_c in -20.0..20.0f64, amp in 0.0..40.0f64,
        x in coord(), y in coord(), r in 1usize..4, k in kernel(), sigma in 0.1..30.0f64,
    ) {
        // linear ramp (exponent 1) plus a square-root cusp (exponent 1/2),
        // bounded with exponent 1/2 over patch offsets of at least one pixel
        let f = |row: usize, col: usize| {
            slope_r * row as f64 + slope_c * col as f64 + amp * ((col as f64 - 9.5).abs()).sqrt()
        };
        let img = GrayImage::from_fn(SIDE, SIDE, f).unwrap();
        let eta = r as f64;
        let lip = slope_r.abs() + slope_c.abs();
        let spread = 2.0 * (lip * eta + amp * eta.sqrt());
        let rho = (img.get(x.row as usize, x.col as usize) - img.get(y.row as usize, y.col as usize)).abs();
        let bound = (rho + spread - std::f64::consts::SQRT_2 * sigma).max(0.0);
        prop_assert!(rho_hat(&img, x, y, r, k, sigma).unwrap() <= bound + 1e-9);
    }
}

#[test]
fn split_offsets_are_the_odd_half() {
    for r in 1..=10usize {
        let offsets = split_patch_offsets(r);
        let side = 2 * r + 1;
        assert_eq!(offsets.len(), side * side / 2);
        for dr in -(r as isize)..=r as isize {
            for dc in -(r as isize)..=r as isize {
                let odd = (dr + dc).rem_euclid(2) == 1;
                assert_eq!(offsets.contains(&(dr, dc)), odd);
            }
        }
    }
    assert_eq!(split_patch_offsets(1).len(), 4);
    assert_eq!(split_patch_offsets(10).len(), 220);
}
