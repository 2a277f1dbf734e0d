//! Brute-force reference implementations used by integration and acceptance tests.
//! Nothing here calls into the library under test.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

pub type Pixels = HashSet<(usize, usize)>;

#[derive(Debug, Clone)]
pub struct Item {
    pub image: u64,
    pub category: u64,
    pub pixels: Pixels,
    /// Ignored for ground truth.
    pub score: f64,
}

pub fn rect_pixels(x: usize, y: usize, w: usize, h: usize) -> Pixels {
    (y..y + h).flat_map(|yy| (x..x + w).map(move |xx| (xx, yy))).collect()
}

pub fn pixel_iou(a: &Pixels, b: &Pixels) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Every pixel of a `width x height` grid within Chebyshev distance `r` of `set`.
pub fn chebyshev_grow(set: &Pixels, r: usize, width: usize, height: usize) -> Pixels {
    let mut out = Pixels::new();
    for &(x, y) in set {
        for yy in y.saturating_sub(r)..=(y + r).min(height - 1) {
            for xx in x.saturating_sub(r)..=(x + r).min(width - 1) {
                out.insert((xx, yy));
            }
        }
    }
    out
}

/// Pixels whose whole `(2r+1)^2` window lies inside both the grid and `set`.
pub fn chebyshev_shrink(set: &Pixels, r: usize, width: usize, height: usize) -> Pixels {
    let r = r as i64;
    set.iter()
        .copied()
        .filter(|&(x, y)| {
            (-r..=r).all(|dy| {
                (-r..=r).all(|dx| {
                    let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                    xx >= 0
                        && yy >= 0
                        && (xx as usize) < width
                        && (yy as usize) < height
                        && set.contains(&(xx as usize, yy as usize))
                })
            })
        })
        .collect()
}

/// 8-connected components by breadth-first flood fill.
pub fn flood_components(set: &Pixels) -> Vec<Pixels> {
    let mut seen = Pixels::new();
    let mut ordered: Vec<_> = set.iter().copied().collect();
    ordered.sort_by_key(|&(x, y)| (y, x));
    let mut out = Vec::new();
    for start in ordered {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = Pixels::new();
        let mut queue = VecDeque::from([start]);
        while let Some((x, y)) = queue.pop_front() {
            comp.insert((x, y));
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 {
                        continue;
                    }
                    let n = (nx as usize, ny as usize);
                    if set.contains(&n) && seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Precision interpolated at 101 recall points, with recall compared as exact ratios.
fn interpolated(hits: &[bool], n_gt: usize) -> f64 {
    let mut tp = 0usize;
    let points: Vec<(usize, f64)> = hits
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            tp += h as usize;
            (tp, tp as f64 / (k + 1) as f64)
        })
        .collect();
    let mut sum = 0.0;
    for i in 0..=100usize {
        // recall tp / n_gt >= i / 100
        let best = points.iter().filter(|(tp, _)| tp * 100 >= i * n_gt).map(|p| p.1).fold(0.0, f64::max);
        sum += best;
    }
    sum / 101.0
}

/// AP of one category at one threshold.
fn class_ap(preds: &[&Item], gts: &[&Item], threshold: f64, max_dets: usize) -> f64 {
    let images: BTreeSet<u64> = gts.iter().chain(preds).map(|i| i.image).collect();
    let mut scored: Vec<(f64, usize, bool)> = Vec::new();
    let mut seq = 0;
    for img in images {
        let mut ps: Vec<&Item> = preds.iter().copied().filter(|p| p.image == img).collect();
        let gs: Vec<&Item> = gts.iter().copied().filter(|g| g.image == img).collect();
        // insertion sort keeps equal scores in input order
        for k in 1..ps.len() {
            let mut j = k;
            while j > 0 && ps[j - 1].score < ps[j].score {
                ps.swap(j - 1, j);
                j -= 1;
            }
        }
        ps.truncate(max_dets);
        let mut taken = vec![false; gs.len()];
        for p in ps {
            let mut best: Option<usize> = None;
            let mut best_iou = -1.0;
            for (g, gt) in gs.iter().enumerate() {
                let iou = pixel_iou(&p.pixels, &gt.pixels);
                if !taken[g] && iou >= threshold && iou > best_iou {
                    best = Some(g);
                    best_iou = iou;
                }
            }
            if let Some(g) = best {
                taken[g] = true;
            }
            scored.push((p.score, seq, best.is_some()));
            seq += 1;
        }
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let hits: Vec<bool> = scored.iter().map(|s| s.2).collect();
    interpolated(&hits, gts.len())
}

/// `(AP, AP50, AP75)` averaged over categories that have ground truth.
pub fn brute_force_ap(preds: &[Item], gts: &[Item], max_dets: usize) -> (f64, f64, f64) {
    let classes: BTreeSet<u64> = gts.iter().map(|g| g.category).collect();
    let at = |t: f64| {
        classes
            .iter()
            .map(|&c| {
                let ps: Vec<&Item> = preds.iter().filter(|p| p.category == c).collect();
                let gs: Vec<&Item> = gts.iter().filter(|g| g.category == c).collect();
                class_ap(&ps, &gs, t, max_dets)
            })
            .sum::<f64>()
            / classes.len() as f64
    };
    let curve: Vec<f64> = (0..10).map(|i| at((50 + 5 * i) as f64 / 100.0)).collect();
    (curve.iter().sum::<f64>() / 10.0, curve[0], curve[5])
}
