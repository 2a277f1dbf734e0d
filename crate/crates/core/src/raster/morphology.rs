//! Binary morphology with the 3x3 rectangular structuring element.
//!
//! Pixels outside the image read as unset for both dilation and erosion, so erosion
//! eats into regions touching the border. `n` iterations of the 3x3 element equal one
//! pass with a `(2n+1) x (2n+1)` square, which is evaluated separably with running
//! counts along rows and then columns.

use super::{label_components, Bitmap, MIN_COMPONENT_PIXELS};
use crate::error::{Error, Result};

/// `iterations` dilations with the 3x3 square.
pub fn dilate(b: &Bitmap, iterations: usize) -> Bitmap {
    if iterations == 0 {
        return b.clone();
    }
    let rows = window_pass(b.bits(), b.width(), b.height(), iterations, Axis::Row, Mode::Any);
    let bits = window_pass(&rows, b.width(), b.height(), iterations, Axis::Column, Mode::Any);
    Bitmap::from_raw(b.width(), b.height(), bits)
}

/// `iterations` erosions with the 3x3 square.
pub fn erode(b: &Bitmap, iterations: usize) -> Bitmap {
    if iterations == 0 {
        return b.clone();
    }
    let rows = window_pass(b.bits(), b.width(), b.height(), iterations, Axis::Row, Mode::All);
    let bits = window_pass(&rows, b.width(), b.height(), iterations, Axis::Column, Mode::All);
    Bitmap::from_raw(b.width(), b.height(), bits)
}

/// One erosion followed by one dilation.
pub fn opening(b: &Bitmap) -> Bitmap {
    dilate(&erode(b, 1), 1)
}

/// Clears every 8-connected component with fewer than `min_pixels` pixels.
pub fn remove_small_components(b: &Bitmap, min_pixels: usize) -> Bitmap {
    let mut out = Bitmap::from_raw(b.width(), b.height(), vec![false; b.width() * b.height()]);
    for cc in label_components(b) {
        if cc.pixel_count >= min_pixels {
            out.paste_or(&cc.mask, cc.bbox.x, cc.bbox.y);
        }
    }
    out
}

/// Optional opening (plus removal of components under [`MIN_COMPONENT_PIXELS`]), then
/// `p` dilations and `q` erosions, i.e. a `(p - q)`-pixel boundary expansion.
///
/// Work is confined to the bounding box of the set pixels padded by `p + 1`, which
/// gives the same result as processing the whole bitmap.
pub fn expand_region(b: &Bitmap, p: usize, q: usize, apply_opening: bool) -> Result<Bitmap> {
    if p < q {
        return Err(Error::ShrinkingContourSpec { p, q });
    }
    let Some(bounds) = b.bounds() else {
        return Ok(b.clone());
    };
    let window = bounds.padded(p + 1, b.width(), b.height());
    let mut region = b.crop(window);
    if apply_opening {
        region = remove_small_components(&opening(&region), MIN_COMPONENT_PIXELS);
    }
    let region = erode(&dilate(&region, p), q);
    let mut out = Bitmap::from_raw(b.width(), b.height(), vec![false; b.width() * b.height()]);
    out.paste_or(&region, window.x, window.y);
    Ok(out)
}

#[derive(Clone, Copy)]
enum Axis {
    Row,
    Column,
}

#[derive(Clone, Copy)]
enum Mode {
    /// Set if any pixel of the window is set (dilation).
    Any,
    /// Set if the whole window lies inside the image and is set (erosion).
    All,
}

fn window_pass(src: &[bool], width: usize, height: usize, radius: usize, axis: Axis, mode: Mode) -> Vec<bool> {
    let (lines, len, stride, step) = match axis {
        Axis::Row => (height, width, width, 1),
        Axis::Column => (width, height, 1, width),
    };
    let mut out = vec![false; src.len()];
    let mut prefix = vec![0u32; len + 1];
    for line in 0..lines {
        let base = line * stride;
        for i in 0..len {
            prefix[i + 1] = prefix[i] + u32::from(src[base + i * step]);
        }
        for i in 0..len {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(len - 1);
            let count = prefix[hi + 1] - prefix[lo];
            out[base + i * step] = match mode {
                Mode::Any => count > 0,
                Mode::All => i >= radius && i + radius < len && count as usize == 2 * radius + 1,
            };
        }
    }
    out
}
