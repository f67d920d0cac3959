//! Grayscale image container, square window geometry and mirrored borders.
//!
//! Coordinates are integer `(row, col)` pairs. Reads outside the image are
//! resolved by reflecting about the border pixel line: on an axis of length
//! `n`, index `-k` maps to `k` and index `n - 1 + k` maps to `n - 1 - k`. The
//! edge pixel itself is not duplicated. Corners apply the rule per axis.

use crate::error::{invalid, Error, Result};

/// Integer pixel position. May lie outside the image before mirroring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub row: isize,
    pub col: isize,
}

impl PixelCoord {
    pub const fn new(row: isize, col: isize) -> Self {
        Self { row, col }
    }

    /// Sup-norm distance between two positions.
    pub fn chebyshev(self, other: PixelCoord) -> usize {
        (self.row - other.row)
            .unsigned_abs()
            .max((self.col - other.col).unsigned_abs())
    }

    pub fn offset(self, drow: isize, dcol: isize) -> PixelCoord {
        PixelCoord::new(self.row + drow, self.col + dcol)
    }
}

impl From<(isize, isize)> for PixelCoord {
    fn from((row, col): (isize, isize)) -> Self {
        Self::new(row, col)
    }
}

/// Row-major grid of real intensities.
///
/// Values are nominally in `[0, 255]` but are not clamped: noisy images and
/// filter outputs may leave that range. Every value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!("image must be non-empty, got {width}x{height}")));
        }
        if values.len() != width * height {
            return Err(invalid(format!(
                "{} values do not fill a {width}x{height} image",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at index {i}")));
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` in row-major order.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at an in-bounds position.
    ///
    /// # Panics
    /// If `(row, col)` is outside the image.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.height && col < self.width, "({row}, {col}) out of bounds");
        self.values[row * self.width + col]
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.row >= 0 && p.col >= 0 && (p.row as usize) < self.height && (p.col as usize) < self.width
    }

    /// Reads through the mirrored border extension.
    pub fn mirror_read(&self, p: PixelCoord) -> Result<f64> {
        let r = reflect_index(p.row, self.height)?;
        let c = reflect_index(p.col, self.width)?;
        Ok(self.values[r * self.width + c])
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Copies out the `height x width` block whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Self> {
        if row + height > self.height || col + width > self.width {
            return Err(invalid(format!(
                "crop {width}x{height} at ({row}, {col}) exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let mut values = Vec::with_capacity(width * height);
        for r in row..row + height {
            let start = r * self.width + col;
            values.extend_from_slice(&self.values[start..start + width]);
        }
        Self::new(width, height, values)
    }

    /// Centered crop, used to cut benchmark images down to a working size.
    pub fn center_crop(&self, width: usize, height: usize) -> Result<Self> {
        let row = self.height.saturating_sub(height) / 2;
        let col = self.width.saturating_sub(width) / 2;
        self.crop(row, col, width, height)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub(crate) fn check_same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                expected_width: self.width,
                expected_height: self.height,
                width: other.width,
                height: other.height,
            });
        }
        Ok(())
    }
}

/// Reflects `index` into `0..len` about the border pixel lines.
pub fn reflect_index(index: isize, len: usize) -> Result<usize> {
    let n = len as isize;
    let r = if index < 0 {
        -index
    } else if index >= n {
        2 * (n - 1) - index
    } else {
        index
    };
    if r < 0 || r >= n {
        return Err(Error::InvalidWindow { index, len });
    }
    Ok(r as usize)
}

/// Square window of side `2 * radius + 1` around `center`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub center: PixelCoord,
    pub radius: usize,
}

impl WindowSpec {
    pub fn new(center: PixelCoord, radius: usize) -> Self {
        Self { center, radius }
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn cardinality(&self) -> usize {
        self.side() * self.side()
    }

    /// All window positions in row-major order.
    pub fn pixels(&self) -> Vec<PixelCoord> {
        window_offsets(self.radius)
            .map(|(dr, dc)| self.center.offset(dr, dc))
            .collect()
    }
}

/// Enumerates a window's positions in row-major order.
pub fn window_pixels(spec: WindowSpec) -> Vec<PixelCoord> {
    spec.pixels()
}

/// Row-major `(drow, dcol)` offsets of a square window of the given radius.
pub fn window_offsets(radius: usize) -> impl Iterator<Item = (isize, isize)> + Clone {
    let r = radius as isize;
    (-r..=r).flat_map(move |dr| (-r..=r).map(move |dc| (dr, dc)))
}

/// Mirror-extended copy of an image so that inner loops can index directly.
#[derive(Debug, Clone)]
pub(crate) struct PaddedImage {
    data: Vec<f64>,
    stride: usize,
    pad: usize,
}

impl PaddedImage {
    pub(crate) fn new(img: &GrayImage, pad: usize) -> Result<Self> {
        if pad >= img.width || pad >= img.height {
            return Err(invalid(format!(
                "window reach {pad} needs an image larger than {}x{}",
                img.width, img.height
            )));
        }
        let stride = img.width + 2 * pad;
        let rows = img.height + 2 * pad;
        let mut data = Vec::with_capacity(stride * rows);
        for r in 0..rows {
            let sr = reflect_index(r as isize - pad as isize, img.height)?;
            for c in 0..stride {
                let sc = reflect_index(c as isize - pad as isize, img.width)?;
                data.push(img.values[sr * img.width + sc]);
            }
        }
        Ok(Self { data, stride, pad })
    }

    /// Flat index of image position `(row, col)`; the position may reach up
    /// to `pad` pixels outside the image.
    #[inline]
    pub(crate) fn index(&self, row: isize, col: isize) -> usize {
        ((row + self.pad as isize) as usize) * self.stride + (col + self.pad as isize) as usize
    }

    #[inline]
    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn stride(&self) -> usize {
        self.stride
    }
}
