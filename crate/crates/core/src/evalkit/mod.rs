//! COCO-style mask AP: score-ranked greedy matching per image and category,
//! 101-point interpolated precision, averaged over classes and IoU thresholds.

mod mask;
mod report;

pub use mask::{mask_iou, Mask};
pub use report::{render_report, render_table, ReportFormat, RowLabels};

use std::collections::{BTreeMap, BTreeSet};

use crate::annotate::CocoDataset;
use crate::error::{Error, Result};

/// Per-image, per-category cap on ranked predictions.
pub const DEFAULT_MAX_DETS: usize = 500;
/// Recall sample points `0.00, 0.01, ..., 1.00`.
pub const RECALL_POINTS: usize = 101;

/// `0.50, 0.55, ..., 0.95`, each computed as `(50 + 5 i) / 100` so that values such
/// as 0.6 are the nearest doubles.
pub fn coco_iou_thresholds() -> Vec<f64> {
    (0..10).map(|i| f64::from(50 + 5 * i) / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: u64,
    pub category_id: u64,
    pub mask: Mask,
    pub score: f64,
}

impl Detection {
    pub fn new(image_id: u64, category_id: u64, mask: Mask, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidScore(score));
        }
        Ok(Self { image_id, category_id, mask, score })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: u64,
    pub category_id: u64,
    pub mask: Mask,
}

/// Result of [`match_detections`] for one image and category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Indices into the predictions in rank order, after truncation.
    pub order: Vec<usize>,
    /// Matched ground-truth index per ranked prediction.
    pub matched: Vec<Option<usize>>,
    pub gt_matched: Vec<bool>,
}

impl Matching {
    pub fn true_positives(&self) -> usize {
        self.matched.iter().filter(|m| m.is_some()).count()
    }
}

/// Prediction indices by descending score, ties in input order, cut at `max_dets`.
fn rank(scores: &[f64], max_dets: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.truncate(max_dets);
    order
}

/// Greedy matching over a precomputed `ious[rank][gt]` table.
fn greedy(ious: &[Vec<f64>], n_gt: usize, threshold: f64) -> (Vec<Option<usize>>, Vec<bool>) {
    let mut gt_matched = vec![false; n_gt];
    let matched = ious
        .iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (g, &iou) in row.iter().enumerate() {
                if gt_matched[g] || iou < threshold {
                    continue;
                }
                if best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
            let g = best.map(|(g, _)| g);
            if let Some(g) = g {
                gt_matched[g] = true;
            }
            g
        })
        .collect();
    (matched, gt_matched)
}

/// Ranks `preds` and walks them in order; each takes the still-unmatched ground truth
/// with the highest IoU at or above `iou_threshold` (lowest index on ties).
pub fn match_detections(
    preds: &[Detection],
    gts: &[GroundTruth],
    iou_threshold: f64,
    max_dets: usize,
) -> Result<Matching> {
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let order = rank(&scores, max_dets);
    let ious = iou_table(preds, gts, &order)?;
    let (matched, gt_matched) = greedy(&ious, gts.len(), iou_threshold);
    Ok(Matching { order, matched, gt_matched })
}

fn iou_table(preds: &[Detection], gts: &[GroundTruth], order: &[usize]) -> Result<Vec<Vec<f64>>> {
    order.iter().map(|&p| gts.iter().map(|g| preds[p].mask.iou(&g.mask)).collect()).collect()
}

/// 101-point interpolated AP of one ranked hit list against `n_gt` positives.
pub fn interpolated_ap(hits: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut recall = Vec::with_capacity(hits.len());
    let mut precision = Vec::with_capacity(hits.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for &h in hits {
        if h {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / n_gt as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    for k in (1..precision.len()).rev() {
        precision[k - 1] = precision[k - 1].max(precision[k]);
    }
    let total: f64 = (0..RECALL_POINTS)
        .map(|i| {
            let r = i as f64 / 100.0;
            let k = recall.partition_point(|&x| x < r);
            precision.get(k).copied().unwrap_or(0.0)
        })
        .sum();
    total / RECALL_POINTS as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ap: f64,
    pub ap50: f64,
    pub ap75: f64,
    /// Category id to AP averaged over thresholds.
    pub per_class_ap: BTreeMap<u64, f64>,
    /// `(threshold, AP)` in threshold order.
    pub curve: Vec<(f64, f64)>,
}

fn curve_value(curve: &[(f64, f64)], t: f64) -> Result<f64> {
    curve.iter().find(|(x, _)| (x - t).abs() < 1e-12).map(|&(_, ap)| ap).ok_or(Error::MissingThreshold(t))
}

struct Group {
    scores: Vec<f64>,
    ious: Vec<Vec<f64>>,
    n_gt: usize,
}

/// COCO-protocol mask AP. Categories without ground truth are left out of every mean;
/// a category with ground truth but no predictions scores 0. `thresholds` must include
/// 0.50 and 0.75.
pub fn average_precision(
    preds: &[Detection],
    gts: &[GroundTruth],
    thresholds: &[f64],
    max_dets: usize,
) -> Result<EvalReport> {
    if gts.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    for t in [0.5, 0.75] {
        if !thresholds.iter().any(|x| (x - t).abs() < 1e-12) {
            return Err(Error::MissingThreshold(t));
        }
    }

    let mut keyed: BTreeMap<(u64, u64), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, p) in preds.iter().enumerate() {
        if !(0.0..=1.0).contains(&p.score) {
            return Err(Error::InvalidScore(p.score));
        }
        keyed.entry((p.category_id, p.image_id)).or_default().0.push(i);
    }
    for (i, g) in gts.iter().enumerate() {
        keyed.entry((g.category_id, g.image_id)).or_default().1.push(i);
    }
    let classes: BTreeSet<u64> = gts.iter().map(|g| g.category_id).collect();

    // per class: its (image) groups in image-id order
    let mut per_class: BTreeMap<u64, Vec<Group>> = BTreeMap::new();
    for ((cat, _), (pi, gi)) in &keyed {
        if !classes.contains(cat) {
            continue;
        }
        let ps: Vec<Detection> = pi.iter().map(|&i| preds[i].clone()).collect();
        let gs: Vec<GroundTruth> = gi.iter().map(|&i| gts[i].clone()).collect();
        let scores: Vec<f64> = ps.iter().map(|p| p.score).collect();
        let order = rank(&scores, max_dets);
        let ious = iou_table(&ps, &gs, &order)?;
        let scores = order.iter().map(|&i| scores[i]).collect();
        per_class.entry(*cat).or_default().push(Group { scores, ious, n_gt: gs.len() });
    }

    let mut class_sums: BTreeMap<u64, f64> = classes.iter().map(|&c| (c, 0.0)).collect();
    let mut curve = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut sum = 0.0;
        for (cat, groups) in &per_class {
            let mut ranked: Vec<(f64, bool)> = Vec::new();
            let mut n_gt = 0;
            for g in groups {
                let (matched, _) = greedy(&g.ious, g.n_gt, t);
                ranked.extend(g.scores.iter().zip(&matched).map(|(&s, m)| (s, m.is_some())));
                n_gt += g.n_gt;
            }
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
            let hits: Vec<bool> = ranked.into_iter().map(|(_, h)| h).collect();
            let ap = interpolated_ap(&hits, n_gt);
            *class_sums.get_mut(cat).expect("class present") += ap;
            sum += ap;
        }
        curve.push((t, sum / classes.len() as f64));
    }

    let ap = curve.iter().map(|c| c.1).sum::<f64>() / curve.len() as f64;
    Ok(EvalReport {
        ap,
        ap50: curve_value(&curve, 0.5)?,
        ap75: curve_value(&curve, 0.75)?,
        per_class_ap: class_sums.into_iter().map(|(c, s)| (c, s / thresholds.len() as f64)).collect(),
        curve,
    })
}

/// Ground truth for every instance of a parsed COCO file, rasterized at its page size.
pub fn ground_truth_from_coco(ds: &CocoDataset) -> Vec<GroundTruth> {
    ds.sets
        .iter()
        .flat_map(|set| {
            set.instances.iter().map(move |inst| GroundTruth {
                image_id: set.image_id,
                category_id: inst.category_id,
                mask: Mask::from_polygon(&inst.polygon, set.width, set.height),
            })
        })
        .collect()
}

/// Predictions rasterized at the page sizes of `gt`; a missing score counts as 1.0.
pub fn detections_from_coco(pred: &CocoDataset, gt: &CocoDataset) -> Result<Vec<Detection>> {
    let dims: BTreeMap<u64, (usize, usize)> = gt.sets.iter().map(|s| (s.image_id, (s.width, s.height))).collect();
    let mut out = Vec::new();
    for set in &pred.sets {
        if set.instances.is_empty() {
            continue;
        }
        let &(w, h) = dims.get(&set.image_id).ok_or(Error::UnknownImage(set.image_id))?;
        for inst in &set.instances {
            let mask = Mask::from_polygon(&inst.polygon, w, h);
            out.push(Detection::new(set.image_id, inst.category_id, mask, inst.score.unwrap_or(1.0))?);
        }
    }
    Ok(out)
}

/// Evaluates a prediction file against a ground-truth file; both must declare the same
/// categories.
pub fn evaluate_coco(gt: &CocoDataset, pred: &CocoDataset, thresholds: &[f64], max_dets: usize) -> Result<EvalReport> {
    let sorted = |ds: &CocoDataset| {
        let mut c = ds.categories.clone();
        c.sort();
        c
    };
    if sorted(gt) != sorted(pred) {
        return Err(Error::ClassTable("ground truth and predictions declare different categories".into()));
    }
    let gts = ground_truth_from_coco(gt);
    let preds = detections_from_coco(pred, gt)?;
    average_precision(&preds, &gts, thresholds, max_dets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Bitmap, Rect};

    fn block(x: usize, y: usize, w: usize, h: usize) -> Mask {
        let mut b = Bitmap::new(20, 20).unwrap();
        b.fill_rect(Rect::new(x, y, w, h));
        Mask::from_bitmap(&b)
    }

    fn det(mask: Mask, score: f64) -> Detection {
        Detection::new(1, 1, mask, score).unwrap()
    }

    fn gt(mask: Mask) -> GroundTruth {
        GroundTruth { image_id: 1, category_id: 1, mask }
    }

    #[test]
    fn thresholds_are_exact() {
        let t = coco_iou_thresholds();
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], 0.5);
        assert_eq!(t[2], 0.6);
        assert_eq!(t[5], 0.75);
        assert_eq!(t[9], 0.95);
    }

    #[test]
    fn score_must_be_a_probability() {
        assert!(matches!(Detection::new(1, 1, block(0, 0, 2, 2), 1.5), Err(Error::InvalidScore(_))));
    }

    #[test]
    fn matching_examples() {
        // 10x10 gt vs 10x9 pred: IoU 0.9
        let g = [gt(block(0, 0, 10, 10))];
        let m = match_detections(&[det(block(0, 0, 10, 9), 0.5)], &g, 0.5, 500).unwrap();
        assert_eq!(m.matched, vec![Some(0)]);
        // 10x3 pred inside: IoU 0.3
        let m = match_detections(&[det(block(0, 0, 10, 3), 0.5)], &g, 0.5, 500).unwrap();
        assert_eq!(m.matched, vec![None]);
        assert_eq!(m.gt_matched, vec![false]);
    }

    #[test]
    fn higher_score_takes_the_gt() {
        let g = [gt(block(0, 0, 10, 10))];
        // IoU 0.8 at score 0.9, IoU 0.9 at score 0.8
        let preds = [det(block(0, 0, 10, 8), 0.9), det(block(0, 0, 10, 9), 0.8)];
        let m = match_detections(&preds, &g, 0.5, 500).unwrap();
        assert_eq!(m.order, vec![0, 1]);
        assert_eq!(m.matched, vec![Some(0), None]);
    }

    #[test]
    fn ties_keep_input_order_and_truncate() {
        let g = [gt(block(0, 0, 4, 4))];
        let preds = [det(block(0, 0, 4, 4), 0.5), det(block(0, 0, 4, 4), 0.5), det(block(0, 0, 4, 4), 0.7)];
        let m = match_detections(&preds, &g, 0.5, 2).unwrap();
        assert_eq!(m.order, vec![2, 0]);
        assert_eq!(m.matched, vec![Some(0), None]);
    }

    #[test]
    fn perfect_predictions_score_one() {
        let g = vec![gt(block(0, 0, 5, 5)), gt(block(10, 10, 4, 6))];
        let p: Vec<_> = g.iter().map(|g| det(g.mask.clone(), 1.0)).collect();
        let r = average_precision(&p, &g, &coco_iou_thresholds(), 500).unwrap();
        assert_eq!((r.ap, r.ap50, r.ap75), (1.0, 1.0, 1.0));
    }

    #[test]
    fn iou_of_exactly_point_six() {
        // 5x5 gt, 5x3 pred: IoU 15/25
        let r =
            average_precision(&[det(block(0, 0, 5, 3), 0.9)], &[gt(block(0, 0, 5, 5))], &coco_iou_thresholds(), 500)
                .unwrap();
        assert_eq!(r.ap50, 1.0);
        assert_eq!(r.ap75, 0.0);
        assert!((r.ap - 0.3).abs() < 1e-12);
        let hits: Vec<_> = r.curve.iter().map(|c| c.1).collect();
        assert_eq!(hits, [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn false_positive_ranked_first_halves_ap50() {
        // 20x10 gt; IoU 0.4 at score 0.9, IoU 0.95 at score 0.8
        let mut g = Bitmap::new(20, 20).unwrap();
        g.fill_rect(Rect::new(0, 0, 20, 10));
        let mut low = Bitmap::new(20, 20).unwrap();
        low.fill_rect(Rect::new(0, 0, 8, 10));
        let mut high = Bitmap::new(20, 20).unwrap();
        high.fill_rect(Rect::new(0, 0, 19, 10));
        let preds = [det(Mask::from_bitmap(&low), 0.9), det(Mask::from_bitmap(&high), 0.8)];
        let r = average_precision(&preds, &[gt(Mask::from_bitmap(&g))], &[0.5, 0.75], 500).unwrap();
        assert_eq!(r.ap50, 0.5);
    }

    #[test]
    fn classes_without_gt_are_excluded() {
        let g = [gt(block(0, 0, 5, 5))];
        let mut stray = det(block(10, 10, 5, 5), 0.9);
        stray.category_id = 2;
        let r = average_precision(&[det(block(0, 0, 5, 5), 1.0), stray], &g, &coco_iou_thresholds(), 500).unwrap();
        assert_eq!(r.ap, 1.0);
        assert_eq!(r.per_class_ap.keys().copied().collect::<Vec<_>>(), [1]);
    }

    #[test]
    fn missing_class_predictions_score_zero() {
        let mut other = gt(block(10, 10, 5, 5));
        other.category_id = 2;
        let g = [gt(block(0, 0, 5, 5)), other];
        let r = average_precision(&[det(block(0, 0, 5, 5), 1.0)], &g, &coco_iou_thresholds(), 500).unwrap();
        assert_eq!(r.ap, 0.5);
        assert_eq!(r.per_class_ap[&2], 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(average_precision(&[], &[], &coco_iou_thresholds(), 500), Err(Error::EmptyGroundTruth)));
        let g = [gt(block(0, 0, 5, 5))];
        assert!(matches!(average_precision(&[], &g, &[0.5], 500), Err(Error::MissingThreshold(t)) if t == 0.75));
    }

    #[test]
    fn interpolation_by_hand() {
        // TP, FP, TP over 2 positives: recall 0.5 at precision 1, 1.0 at 2/3
        let ap = interpolated_ap(&[true, false, true], 2);
        let expected = (51.0 * 1.0 + 50.0 * 2.0 / 3.0) / 101.0;
        assert!((ap - expected).abs() < 1e-15);
        assert_eq!(interpolated_ap(&[], 3), 0.0);
    }
}
