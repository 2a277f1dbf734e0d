use crate::error::{Error, Result};
use crate::evalkit::Mask;
use crate::raster::{Bitmap, GrayRaster};
use crate::Scalar;

pub const DEFAULT_NMS_SIGMA: f64 = 2.0;

fn descending<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

/// Gaussian Matrix NMS. Within a category, detection `j` is decayed by
/// `min_i exp(-(iou_ij^2 - comp_i^2) / sigma)` over every higher-scored `i`, where
/// `comp_i` is the largest IoU of `i` with a detection scored above it; the factor is
/// capped at 1. Scores are returned in input order; ties rank by input order.
pub fn matrix_nms<T: Scalar>(masks: &[Bitmap], scores: &[T], categories: &[usize], sigma: T) -> Result<Vec<T>> {
    if masks.len() != scores.len() || categories.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} masks, {} scores, {} categories",
            masks.len(),
            scores.len(),
            categories.len()
        )));
    }
    if sigma.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Shape("sigma must be positive".into()));
    }
    let order = descending(scores);
    let cropped: Vec<Mask> = order.iter().map(|&i| Mask::from_bitmap(&masks[i])).collect();
    let n = order.len();

    // iou[a][b] for ranks a < b of the same category
    let mut iou = vec![vec![T::zero(); n]; n];
    for b in 0..n {
        for a in 0..b {
            if categories[order[a]] == categories[order[b]] {
                iou[a][b] = T::lit(cropped[a].iou(&cropped[b])?);
            }
        }
    }
    let comp: Vec<T> = (0..n).map(|a| (0..a).fold(T::zero(), |m, c| m.max(iou[c][a]))).collect();

    let mut out = scores.to_vec();
    for b in 0..n {
        let mut decay = T::one();
        for a in 0..b {
            if categories[order[a]] != categories[order[b]] {
                continue;
            }
            let d = (-(iou[a][b] * iou[a][b] - comp[a] * comp[a]) / sigma).exp();
            decay = decay.min(d);
        }
        out[order[b]] = scores[order[b]] * decay;
    }
    Ok(out)
}

/// Caps and thresholds applied at inference time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig<T> {
    pub pre_nms: usize,
    pub max_dets: usize,
    pub mask_threshold: T,
    pub sigma: T,
}

impl<T: Scalar> Default for InferenceConfig<T> {
    fn default() -> Self {
        Self { pre_nms: 800, max_dets: 500, mask_threshold: T::lit(0.25), sigma: T::lit(DEFAULT_NMS_SIGMA) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeptDetection<T> {
    /// Position in the input.
    pub index: usize,
    pub category: usize,
    /// Score after decay.
    pub score: T,
    pub mask: Bitmap,
}

/// Keeps the `pre_nms` best-scored detections, binarizes their soft masks at
/// `mask_threshold` (value >= threshold is set), decays scores with [`matrix_nms`] and
/// returns at most `max_dets` by decayed score.
pub fn inference_filter<T: Scalar>(
    scores: &[T],
    soft_masks: &[GrayRaster<T>],
    categories: &[usize],
    cfg: &InferenceConfig<T>,
) -> Result<Vec<KeptDetection<T>>> {
    if soft_masks.len() != scores.len() || categories.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} masks, {} scores, {} categories",
            soft_masks.len(),
            scores.len(),
            categories.len()
        )));
    }
    let mut order = descending(scores);
    order.truncate(cfg.pre_nms);
    let masks: Vec<Bitmap> = order.iter().map(|&i| soft_masks[i].threshold(cfg.mask_threshold)).collect();
    let sub_scores: Vec<T> = order.iter().map(|&i| scores[i]).collect();
    let sub_cats: Vec<usize> = order.iter().map(|&i| categories[i]).collect();
    let decayed = matrix_nms(&masks, &sub_scores, &sub_cats, cfg.sigma)?;

    let mut ranked = descending(&decayed);
    ranked.truncate(cfg.max_dets);
    Ok(ranked
        .into_iter()
        .map(|r| KeptDetection { index: order[r], category: sub_cats[r], score: decayed[r], mask: masks[r].clone() })
        .collect())
}
