//! Pixel-level primitives: class-coded label images, binary bitmaps, 3x3 morphology,
//! connected components and resampling.

mod components;
pub mod io;
mod morphology;
mod resize;

pub use components::{label_components, ConnectedComponent};
pub use morphology::{dilate, erode, expand_region, opening, remove_small_components};
pub use resize::{bilinear_plane, resize_bilinear, resize_nearest, source_coordinate};

use crate::error::{Error, Result};

/// Class codes of the default ten-class layout: `line1..line8` are `20 * i`, then the
/// left and right titles.
pub const DEFAULT_CLASS_CODES: [u8; 10] = [20, 40, 60, 80, 100, 120, 140, 160, 180, 200];

/// Components smaller than this are dropped as noise after an opening.
pub const MIN_COMPONENT_PIXELS: usize = 20;

/// Axis-aligned pixel rectangle `(x, y, w, h)`; `w` and `h` count pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    /// Grows the rectangle by `margin` on every side, clipped to `width x height`.
    pub fn padded(&self, margin: usize, width: usize, height: usize) -> Rect {
        let x0 = self.x.saturating_sub(margin);
        let y0 = self.y.saturating_sub(margin);
        let x1 = (self.right() + margin).min(width);
        let y1 = (self.bottom() + margin).min(height);
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }
}

/// One pixel holding a value outside the legal class-code set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub x: usize,
    pub y: usize,
    pub value: u8,
}

/// 8-bit class-coded raster ("intensity image"), row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl LabelImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if data.len() != width * height {
            return Err(Error::BufferSize { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Paints `rect` (clipped to the image) with `value`.
    pub fn fill_rect(&mut self, rect: Rect, value: u8) {
        let x1 = rect.right().min(self.width);
        let y1 = rect.bottom().min(self.height);
        for y in rect.y.min(y1)..y1 {
            let row = y * self.width;
            self.data[row + rect.x.min(x1)..row + x1].fill(value);
        }
    }

    /// Tight bounding box of the pixels equal to `code`, if any.
    pub fn code_bounds(&self, code: u8) -> Option<Rect> {
        bounds_of(self.width, self.height, |i| self.data[i] == code)
    }
}

/// Lists every pixel whose value is not background (0) or one of the default class codes.
pub fn validate_label_image(img: &LabelImage) -> Vec<Violation> {
    validate_with_codes(img, &DEFAULT_CLASS_CODES)
}

/// Like [`validate_label_image`] with a caller-supplied set of legal non-zero codes.
pub fn validate_with_codes(img: &LabelImage, codes: &[u8]) -> Vec<Violation> {
    let mut legal = [false; 256];
    legal[0] = true;
    for &c in codes {
        legal[c as usize] = true;
    }
    img.data
        .iter()
        .enumerate()
        .filter(|(_, v)| !legal[**v as usize])
        .map(|(i, &value)| Violation { x: i % img.width, y: i / img.width, value })
        .collect()
}

/// Bitmap with a bit set exactly where the pixel equals `class_code`.
pub fn binarize_class(img: &LabelImage, class_code: u8) -> Result<Bitmap> {
    binarize_with_codes(img, class_code, &DEFAULT_CLASS_CODES)
}

pub fn binarize_with_codes(img: &LabelImage, class_code: u8, codes: &[u8]) -> Result<Bitmap> {
    if !codes.contains(&class_code) {
        return Err(Error::IllegalClassCode(class_code));
    }
    let bits = img.data.iter().map(|&v| v == class_code).collect();
    Ok(Bitmap { width: img.width, height: img.height, bits })
}

/// Binary raster, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitmap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Bitmap {}x{}", self.width, self.height)?;
        if self.width * self.height <= 4096 {
            for row in self.bits.chunks(self.width) {
                let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

impl Bitmap {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        Ok(Self { width, height, bits: vec![false; width * height] })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if bits.len() != width * height {
            return Err(Error::BufferSize { width, height, len: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    /// Parses rows of `#` (set) and `.` (unset); handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch("ragged ascii bitmap".into()));
        }
        let bits = rows.iter().flat_map(|r| r.bytes().map(|b| b == b'#')).collect();
        Self::from_bits(width, height, bits)
    }

    pub(crate) fn from_raw(width: usize, height: usize, bits: Vec<bool>) -> Self {
        debug_assert_eq!(bits.len(), width * height);
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Bounds-checked read with signed coordinates; outside reads as unset.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn fill_rect(&mut self, rect: Rect) {
        let x1 = rect.right().min(self.width);
        let y1 = rect.bottom().min(self.height);
        for y in rect.y.min(y1)..y1 {
            let row = y * self.width;
            self.bits[row + rect.x.min(x1)..row + x1].fill(true);
        }
    }

    /// Tight bounding box of the set bits.
    pub fn bounds(&self) -> Option<Rect> {
        bounds_of(self.width, self.height, |i| self.bits[i])
    }

    /// Copies out `rect`, which must lie inside the bitmap.
    pub fn crop(&self, rect: Rect) -> Bitmap {
        assert!(rect.right() <= self.width && rect.bottom() <= self.height);
        let mut bits = Vec::with_capacity(rect.w * rect.h);
        for y in rect.y..rect.bottom() {
            let row = y * self.width;
            bits.extend_from_slice(&self.bits[row + rect.x..row + rect.right()]);
        }
        Bitmap::from_raw(rect.w, rect.h, bits)
    }

    /// ORs `patch` into this bitmap with its top-left corner at `(x, y)`; parts outside are clipped.
    pub fn paste_or(&mut self, patch: &Bitmap, x: usize, y: usize) {
        for py in 0..patch.height {
            let ty = y + py;
            if ty >= self.height {
                break;
            }
            for px in 0..patch.width {
                let tx = x + px;
                if tx >= self.width {
                    break;
                }
                if patch.get(px, py) {
                    self.bits[ty * self.width + tx] = true;
                }
            }
        }
    }

    /// `true` when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Bitmap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Number of bits set in both; dimensions must agree.
    pub fn intersection_count(&self, other: &Bitmap) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a && b).count()
    }

    pub fn set_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }
}

fn bounds_of(width: usize, height: usize, is_set: impl Fn(usize) -> bool) -> Option<Rect> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..height {
        for x in 0..width {
            if is_set(y * width + x) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    (x0 != usize::MAX).then(|| Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Single-channel floating-point raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayRaster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: crate::Scalar> GrayRaster<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if data.len() != width * height {
            return Err(Error::BufferSize { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Bits set where the value is at least `threshold`.
    pub fn threshold(&self, threshold: T) -> Bitmap {
        Bitmap::from_raw(self.width, self.height, self.data.iter().map(|&v| v >= threshold).collect())
    }
}
