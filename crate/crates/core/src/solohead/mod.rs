//! Mechanics of a grid-based dynamic-kernel instance head at desk scale: grid assignment, pyramid fusion,
//! dynamic 1x1 convolution, Matrix NMS and the focal + dice loss with gradients.
//! Weights are always supplied by the caller; nothing here is trained.

mod fusion;
mod loss;
mod nms;

pub use fusion::{avg_pool2, dynamic_convolve, fuse_pyramid, resize_channels, Fused};
pub use loss::{dice_loss, dice_loss_grad, focal_loss, focal_loss_grad, total_loss, LossConfig};
pub use nms::{inference_filter, matrix_nms, InferenceConfig, KeptDetection, DEFAULT_NMS_SIGMA};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raster::Bitmap;
use crate::Scalar;

/// Dense row-major array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    /// Fails when the length disagrees with the shape or a value is not finite.
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!("shape {shape:?} needs {n} values, got {}", data.len())));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![T::zero(); n] }
    }

    pub fn filled(shape: Vec<usize>, value: T) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![value; n] }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for d in (0..shape.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank");
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "index {index:?} out of bounds for shape {:?}", self.shape);
            acc * d + i
        })
    }

    pub fn get(&self, index: &[usize]) -> T {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    /// `(h, w, c)` of a rank-3 tensor.
    pub fn hwc(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [h, w, c] => Ok((h, w, c)),
            _ => Err(Error::Shape(format!("expected h x w x c, got {:?}", self.shape))),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(self.data.iter().zip(&other.data).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }
}

/// Grid sizes per pyramid level, class count and center-region factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub levels: Vec<usize>,
    pub classes: usize,
    pub epsilon: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { levels: vec![12, 16, 24, 36, 40], classes: 10, epsilon: 0.2 }
    }
}

/// Mask-branch channel of grid cell `(i, j)`: `i * s + j`.
pub fn grid_index(i: usize, j: usize, s: usize) -> Result<usize> {
    if i >= s || j >= s {
        return Err(Error::GridIndex { i, j, s });
    }
    Ok(i * s + j)
}

/// One ground-truth instance; `class` is 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetInstance {
    pub mask: Bitmap,
    pub class: usize,
}

/// Targets for one grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTargets {
    pub s: usize,
    /// Class of cell `i * s + j`, `None` for background.
    pub category: Vec<Option<usize>>,
    /// Mask targets keyed by channel.
    pub masks: BTreeMap<usize, Bitmap>,
}

impl LevelTargets {
    /// `s x s x classes` one-hot category target.
    pub fn category_one_hot<T: Scalar>(&self, classes: usize) -> Tensor<T> {
        let mut t = Tensor::zeros(vec![self.s, self.s, classes]);
        for (k, c) in self.category.iter().enumerate() {
            if let Some(c) = *c {
                t.set(&[k / self.s, k % self.s, c], T::one());
            }
        }
        t
    }

    pub fn positive_cells(&self) -> Vec<(usize, usize)> {
        (0..self.category.len()).filter(|&k| self.category[k].is_some()).map(|k| (k / self.s, k % self.s)).collect()
    }
}

/// Grid cells `(i, j)` whose centers fall inside the instance's center region: the box
/// of `epsilon` times the mask's bounding-box size around its center of mass. When no
/// cell center qualifies, the cell holding the center of mass is used.
pub fn center_cells(mask: &Bitmap, s: usize, epsilon: f64) -> Vec<(usize, usize)> {
    let Some(bounds) = mask.bounds() else {
        return Vec::new();
    };
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for (x, y) in mask.set_positions() {
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
        n += 1.0;
    }
    let (cx, cy) = (sx / n, sy / n);
    let (hw, hh) = (0.5 * epsilon * bounds.w as f64, 0.5 * epsilon * bounds.h as f64);
    let cell_w = w / s as f64;
    let cell_h = h / s as f64;
    let mut cells = Vec::new();
    for i in 0..s {
        let yc = (i as f64 + 0.5) * cell_h;
        if (yc - cy).abs() > hh {
            continue;
        }
        for j in 0..s {
            let xc = (j as f64 + 0.5) * cell_w;
            if (xc - cx).abs() <= hw {
                cells.push((i, j));
            }
        }
    }
    if cells.is_empty() {
        let i = ((cy / cell_h) as usize).min(s - 1);
        let j = ((cx / cell_w) as usize).min(s - 1);
        cells.push((i, j));
    }
    cells
}

/// Per level, every center cell of every instance gets the instance's class and mask
/// (channel [`grid_index`]); later instances overwrite earlier ones on shared cells.
pub fn assign_targets(
    instances: &[TargetInstance],
    grid: &GridSpec,
    image: (usize, usize),
) -> Result<Vec<LevelTargets>> {
    if grid.classes == 0 {
        return Err(Error::Shape("grid needs at least one class".into()));
    }
    for inst in instances {
        if (inst.mask.width(), inst.mask.height()) != image {
            return Err(Error::DimensionMismatch(format!(
                "instance mask {}x{} on a {}x{} image",
                inst.mask.width(),
                inst.mask.height(),
                image.0,
                image.1
            )));
        }
        if inst.class >= grid.classes {
            return Err(Error::Shape(format!("class {} outside 0..{}", inst.class, grid.classes)));
        }
    }
    grid.levels
        .iter()
        .map(|&s| {
            let mut level = LevelTargets { s, category: vec![None; s * s], masks: BTreeMap::new() };
            for inst in instances {
                for (i, j) in center_cells(&inst.mask, s, grid.epsilon) {
                    let k = grid_index(i, j, s)?;
                    level.category[k] = Some(inst.class);
                    level.masks.insert(k, inst.mask.clone());
                }
            }
            Ok(level)
        })
        .collect()
}
