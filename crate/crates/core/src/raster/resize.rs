//! Resampling.
//!
//! Both resamplers use pixel-center alignment: destination pixel `d` along an axis of
//! length `dst` maps to source coordinate `(d + 0.5) * src / dst - 0.5`. Bilinear
//! interpolation clamps that coordinate to `[0, src - 1]` (edge replication). Nearest
//! neighbor takes `floor((d + 0.5) * src / dst)`, evaluated in integers.

use super::{GrayRaster, LabelImage};
use crate::Scalar;

/// Continuous source coordinate of destination pixel `d` (unclamped).
pub fn source_coordinate(d: usize, src: usize, dst: usize) -> f64 {
    (d as f64 + 0.5) * src as f64 / dst as f64 - 0.5
}

fn nearest_index(d: usize, src: usize, dst: usize) -> usize {
    (((2 * d + 1) * src) / (2 * dst)).min(src - 1)
}

/// Nearest-neighbor resampling of a label image; never invents codes.
pub fn resize_nearest(img: &LabelImage, width: usize, height: usize) -> LabelImage {
    assert!(width >= 1 && height >= 1, "target dimensions must be positive");
    if width == img.width() && height == img.height() {
        return img.clone();
    }
    let xs: Vec<usize> = (0..width).map(|x| nearest_index(x, img.width(), width)).collect();
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let sy = nearest_index(y, img.height(), height);
        let row = &img.data()[sy * img.width()..(sy + 1) * img.width()];
        data.extend(xs.iter().map(|&sx| row[sx]));
    }
    LabelImage::new(width, height, data).expect("dimensions checked")
}

struct Tap<T> {
    lo: usize,
    hi: usize,
    frac: T,
}

fn taps<T: Scalar>(src: usize, dst: usize) -> Vec<Tap<T>> {
    (0..dst)
        .map(|d| {
            let s = source_coordinate(d, src, dst).clamp(0.0, (src - 1) as f64);
            let lo = s.floor() as usize;
            Tap { lo, hi: (lo + 1).min(src - 1), frac: T::lit(s - lo as f64) }
        })
        .collect()
}

/// Bilinear resampling of one row-major plane of `src_w x src_h` values.
pub fn bilinear_plane<T: Scalar>(src: &[T], src_w: usize, src_h: usize, dst_w: usize, dst_h: usize) -> Vec<T> {
    assert_eq!(src.len(), src_w * src_h);
    assert!(dst_w >= 1 && dst_h >= 1, "target dimensions must be positive");
    if src_w == dst_w && src_h == dst_h {
        return src.to_vec();
    }
    let xt = taps::<T>(src_w, dst_w);
    let yt = taps::<T>(src_h, dst_h);
    let mut out = Vec::with_capacity(dst_w * dst_h);
    for ty in &yt {
        let r0 = &src[ty.lo * src_w..(ty.lo + 1) * src_w];
        let r1 = &src[ty.hi * src_w..(ty.hi + 1) * src_w];
        for tx in &xt {
            let top = r0[tx.lo] + (r0[tx.hi] - r0[tx.lo]) * tx.frac;
            let bottom = r1[tx.lo] + (r1[tx.hi] - r1[tx.lo]) * tx.frac;
            out.push(top + (bottom - top) * ty.frac);
        }
    }
    out
}

pub fn resize_bilinear<T: Scalar>(img: &GrayRaster<T>, width: usize, height: usize) -> GrayRaster<T> {
    let data = bilinear_plane(img.data(), img.width(), img.height(), width, height);
    GrayRaster::new(width, height, data).expect("dimensions checked")
}
