use super::{GridSpec, Tensor};
use crate::error::{Error, Result};
use crate::raster::bilinear_plane;
use crate::Scalar;

/// Bilinear resize of every channel of an `h x w x c` tensor.
pub fn resize_channels<T: Scalar>(t: &Tensor<T>, height: usize, width: usize) -> Result<Tensor<T>> {
    let (h, w, c) = t.hwc()?;
    if h == 0 || w == 0 || height == 0 || width == 0 {
        return Err(Error::Shape(format!("cannot resize {h}x{w} to {height}x{width}")));
    }
    let mut out = Tensor::zeros(vec![height, width, c]);
    let mut plane = vec![T::zero(); h * w];
    for ch in 0..c {
        for (i, v) in plane.iter_mut().enumerate() {
            *v = t.data()[i * c + ch];
        }
        let resized = bilinear_plane(&plane, w, h, width, height);
        for (i, v) in resized.into_iter().enumerate() {
            out.data_mut()[i * c + ch] = v;
        }
    }
    Ok(out)
}

/// 2x2 average pooling; odd edges average the pixels that exist, so the output is
/// `ceil(h / 2) x ceil(w / 2)`.
pub fn avg_pool2<T: Scalar>(t: &Tensor<T>) -> Result<Tensor<T>> {
    let (h, w, c) = t.hwc()?;
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    let mut out = Tensor::zeros(vec![oh, ow, c]);
    for y in 0..oh {
        for x in 0..ow {
            let ys = 2 * y..(2 * y + 2).min(h);
            let xs = 2 * x..(2 * x + 2).min(w);
            let n = T::from_usize_lossy(ys.len() * xs.len());
            for ch in 0..c {
                let mut sum = T::zero();
                for yy in ys.clone() {
                    for xx in xs.clone() {
                        sum += t.get(&[yy, xx, ch]);
                    }
                }
                out.set(&[y, x, ch], sum / n);
            }
        }
    }
    Ok(out)
}

/// Output of [`fuse_pyramid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Fused<T> {
    /// Unified mask feature `F`, `h x w x E` at the resolution of the first input.
    pub feature: Tensor<T>,
    /// `P2, P3, ...`: `F` followed by repeated 2x average pooling, one per grid level.
    pub pyramid: Vec<Tensor<T>>,
    /// Pyramid level `l` resized to `S_l x S_l x E`.
    pub kernel_inputs: Vec<Tensor<T>>,
}

fn halves(prev: usize, next: usize) -> bool {
    next == prev / 2 || next == prev.div_ceil(2)
}

/// Upsamples `inputs[1..]` bilinearly to the size of `inputs[0]`, concatenates all
/// channels and applies the `E x sum(c)` 1x1 map `weights` to get `F`. Each input must
/// halve the spatial size of the one before it (rounding either way).
pub fn fuse_pyramid<T: Scalar>(inputs: &[Tensor<T>], weights: &Tensor<T>, grid: &GridSpec) -> Result<Fused<T>> {
    let first = inputs.first().ok_or_else(|| Error::Shape("no pyramid inputs".into()))?;
    let (h, w, _) = first.hwc()?;
    let mut dims = Vec::with_capacity(inputs.len());
    for (l, t) in inputs.iter().enumerate() {
        let d = t.hwc()?;
        if let Some(&(ph, pw, _)) = dims.last() {
            if !halves(ph, d.0) || !halves(pw, d.1) {
                return Err(Error::DimensionMismatch(format!(
                    "level {l} is {}x{}, expected half of {ph}x{pw}",
                    d.0, d.1
                )));
            }
        }
        dims.push(d);
    }
    let total_c: usize = dims.iter().map(|d| d.2).sum();
    let (e, wc) = match weights.shape() {
        &[e, wc] => (e, wc),
        other => return Err(Error::Shape(format!("1x1 weights must be E x C, got {other:?}"))),
    };
    if wc != total_c {
        return Err(Error::Shape(format!("1x1 weights expect {wc} channels, inputs have {total_c}")));
    }

    let upsampled: Vec<Tensor<T>> = inputs.iter().map(|t| resize_channels(t, h, w)).collect::<Result<_>>()?;
    let mut feature = Tensor::zeros(vec![h, w, e]);
    let mut concat = vec![T::zero(); total_c];
    for y in 0..h {
        for x in 0..w {
            let mut o = 0;
            for (t, d) in upsampled.iter().zip(&dims) {
                let base = (y * w + x) * d.2;
                concat[o..o + d.2].copy_from_slice(&t.data()[base..base + d.2]);
                o += d.2;
            }
            for k in 0..e {
                let row = &weights.data()[k * total_c..(k + 1) * total_c];
                let v = row.iter().zip(&concat).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                feature.set(&[y, x, k], v);
            }
        }
    }

    let mut pyramid = vec![feature.clone()];
    while pyramid.len() < grid.levels.len() {
        let next = avg_pool2(pyramid.last().expect("non-empty"))?;
        pyramid.push(next);
    }
    pyramid.truncate(grid.levels.len().max(1));
    let kernel_inputs =
        pyramid.iter().zip(&grid.levels).map(|(p, &s)| resize_channels(p, s, s)).collect::<Result<_>>()?;
    Ok(Fused { feature, pyramid, kernel_inputs })
}

/// `out[y][x][k] = sum_e g[k][e] * f[y][x][e]`.
pub fn dynamic_convolve<T: Scalar>(f: &Tensor<T>, g: &Tensor<T>) -> Result<Tensor<T>> {
    let (h, w, e) = f.hwc()?;
    let (k, ge) = match g.shape() {
        &[k, ge] => (k, ge),
        other => return Err(Error::Shape(format!("kernels must be K x E, got {other:?}"))),
    };
    if ge != e {
        return Err(Error::Shape(format!("kernels have {ge} channels, feature has {e}")));
    }
    let mut out = Tensor::zeros(vec![h, w, k]);
    let (fd, gd) = (f.data(), g.data());
    for p in 0..h * w {
        let px = &fd[p * e..(p + 1) * e];
        for kk in 0..k {
            let kernel = &gd[kk * e..(kk + 1) * e];
            out.data_mut()[p * k + kk] = kernel.iter().zip(px).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }
    Ok(out)
}
