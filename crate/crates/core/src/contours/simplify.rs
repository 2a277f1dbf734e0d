//! Teh-Chin dominant-point detection on closed digital curves.
//!
//! Steps, over the cyclic point sequence `p_0 .. p_{n-1}`:
//!
//! 1. Candidates are the points where the 8-direction chain code changes; points on
//!    straight runs have zero curvature and are dropped immediately.
//! 2. Each candidate gets a region of support `k`: the chord `p_{i-k} p_{i+k}` is grown
//!    while its length strictly increases and the relative deviation `d_k / l_k` of
//!    `p_i` from the chord keeps its sign and does not shrink.
//! 3. Significance is the L1 norm of the second difference across the support,
//!    `|p_{i-k} + p_{i+k} - 2 p_i|_1 / 2k`, in `[0, 2]`.
//! 4. Non-maximum suppression within `floor(k/2)` points on either side.
//! 5. Candidates with `k = 1` survive only as strict local maxima of their trace
//!    neighbors, and of two trace-adjacent survivors the less significant goes.
//! 6. Survivors lying on the segment between their neighbors are removed.
//! 7. Where a traced point lies more than [`MAX_DEVIATION`] from the polygon edge that
//!    replaces it, the farthest such point is put back (recursively per edge).

use super::{Contour, Point};

fn direction(a: Point, b: Point) -> (i32, i32) {
    ((b.x - a.x).signum(), (b.y - a.y).signum())
}

fn cross(o: Point, a: Point, b: Point) -> i64 {
    let (ax, ay) = (i64::from(a.x - o.x), i64::from(a.y - o.y));
    let (bx, by) = (i64::from(b.x - o.x), i64::from(b.y - o.y));
    ax * by - ay * bx
}

fn dist2(a: Point, b: Point) -> i64 {
    let dx = i64::from(a.x - b.x);
    let dy = i64::from(a.y - b.y);
    dx * dx + dy * dy
}

struct Support {
    k: usize,
    significance: f64,
}

fn support(points: &[Point], i: usize) -> Support {
    let n = points.len();
    let at = |k: usize, forward: bool| {
        if forward {
            points[(i + k) % n]
        } else {
            points[(i + n - k % n) % n]
        }
    };
    let p = points[i];
    let k_max = ((n - 1) / 2).max(1);

    let mut k = 1;
    let (mut prev_len, mut prev_ratio) = {
        let (a, b) = (at(1, false), at(1, true));
        let l2 = dist2(a, b);
        (l2, if l2 == 0 { 0.0 } else { cross(a, p, b) as f64 / l2 as f64 })
    };
    while k < k_max {
        let (a, b) = (at(k + 1, false), at(k + 1, true));
        let l2 = dist2(a, b);
        if l2 <= prev_len {
            break;
        }
        let ratio = cross(a, p, b) as f64 / l2 as f64;
        if ratio * prev_ratio < 0.0 || ratio.abs() < prev_ratio.abs() {
            break;
        }
        prev_len = l2;
        prev_ratio = ratio;
        k += 1;
    }

    let (a, b) = (at(k, false), at(k, true));
    let l1 = (a.x + b.x - 2 * p.x).abs() + (a.y + b.y - 2 * p.y).abs();
    Support { k, significance: f64::from(l1) / (2 * k) as f64 }
}

/// Keeps the dominant points of a traced closed contour; the result is a subsequence
/// of the input. Contours of at most four points come back unchanged.
pub fn simplify_contour(c: &Contour) -> Contour {
    let pts = &c.points;
    let n = pts.len();
    if n <= 4 {
        return c.clone();
    }
    let prev = |i: usize| (i + n - 1) % n;
    let next = |i: usize| (i + 1) % n;

    let candidates: Vec<usize> =
        (0..n).filter(|&i| direction(pts[prev(i)], pts[i]) != direction(pts[i], pts[next(i)])).collect();

    let mut k = vec![0usize; n];
    let mut sig = vec![0.0f64; n];
    for &i in &candidates {
        let s = support(pts, i);
        k[i] = s.k;
        sig[i] = s.significance;
    }

    let mut alive = vec![false; n];
    for &i in &candidates {
        let half = k[i] / 2;
        let dominated = (1..=half).any(|j| sig[(i + n - j % n) % n] > sig[i] || sig[(i + j) % n] > sig[i]);
        alive[i] = !dominated;
    }

    let alive_sig = |alive: &[bool], i: usize| if alive[i] { sig[i] } else { 0.0 };
    let nms = alive.clone();
    for &i in &candidates {
        if nms[i] && k[i] == 1 && sig[i] < alive_sig(&nms, prev(i)).max(alive_sig(&nms, next(i))) {
            alive[i] = false;
        }
    }

    for &i in &candidates {
        let j = next(i);
        if alive[i] && alive[j] && i != j {
            if sig[j] > sig[i] {
                alive[i] = false;
            } else {
                alive[j] = false;
            }
        }
    }

    let mut kept: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if kept.len() < 3 && candidates.len() >= 3 {
        kept = candidates;
    }
    let kept = refine(pts, drop_collinear(pts, kept));
    Contour { points: kept.into_iter().map(|i| pts[i]).collect(), closed: c.closed }
}

/// Largest tolerated distance, in pixels, between a traced point and the polygon edge
/// that replaces it.
pub const MAX_DEVIATION: f64 = 0.5;

fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let (dx, dy) = (f64::from(b.x - a.x), f64::from(b.y - a.y));
    let (px, py) = (f64::from(p.x - a.x), f64::from(p.y - a.y));
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { ((px * dx + py * dy) / len2).clamp(0.0, 1.0) };
    ((px - t * dx).powi(2) + (py - t * dy).powi(2)).sqrt()
}

/// Re-inserts, edge by edge, the traced point farthest from the edge while that
/// distance exceeds [`MAX_DEVIATION`].
fn refine(pts: &[Point], kept: Vec<usize>) -> Vec<usize> {
    let n = pts.len();
    if kept.len() < 2 {
        return kept;
    }
    let mut out = Vec::with_capacity(kept.len());
    for (m, &from) in kept.iter().enumerate() {
        let to = kept[(m + 1) % kept.len()];
        out.push(from);
        let mut stack = vec![(from, to)];
        let mut inserted = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let span = (b + n - a) % n;
            let far = (1..span).map(|j| (a + j) % n).map(|i| (i, segment_distance(pts[a], pts[b], pts[i]))).fold(
                None,
                |best: Option<(usize, f64)>, cur| match best {
                    Some(bst) if bst.1 >= cur.1 => Some(bst),
                    _ => Some(cur),
                },
            );
            if let Some((i, d)) = far {
                if d > MAX_DEVIATION {
                    inserted.push(i);
                    stack.push((a, i));
                    stack.push((i, b));
                }
            }
        }
        inserted.sort_by_key(|&i| (i + n - from) % n);
        out.extend(inserted);
    }
    out
}

fn drop_collinear(pts: &[Point], mut kept: Vec<usize>) -> Vec<usize> {
    let mut changed = true;
    while changed && kept.len() > 3 {
        changed = false;
        let mut m = 0;
        while m < kept.len() && kept.len() > 3 {
            let a = pts[kept[(m + kept.len() - 1) % kept.len()]];
            let p = pts[kept[m]];
            let b = pts[kept[(m + 1) % kept.len()]];
            let between =
                i64::from(p.x - a.x) * i64::from(b.x - p.x) + i64::from(p.y - a.y) * i64::from(b.y - p.y) >= 0;
            if cross(a, p, b) == 0 && between && a != b {
                kept.remove(m);
                changed = true;
            } else {
                m += 1;
            }
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::find_contours;
    use crate::raster::{Bitmap, Rect};

    fn rect_contour(w: usize, h: usize) -> Contour {
        let mut b = Bitmap::new(w + 4, h + 4).unwrap();
        b.fill_rect(Rect::new(2, 2, w, h));
        find_contours(&b).remove(0)
    }

    fn is_subsequence(sub: &[Point], full: &[Point]) -> bool {
        let mut it = full.iter();
        sub.iter().all(|p| it.any(|q| q == p))
    }

    #[test]
    fn short_contours_unchanged() {
        let c = Contour::from_coords(&[(0, 0), (1, 0), (1, 1)]);
        assert_eq!(simplify_contour(&c), c);
    }

    #[test]
    fn rectangle_keeps_four_corners() {
        let c = rect_contour(10, 6);
        assert_eq!(c.len(), 2 * 9 + 2 * 5);
        let s = simplify_contour(&c);
        assert_eq!(s.points, Contour::from_coords(&[(2, 2), (2, 7), (11, 7), (11, 2)]).points);
    }

    #[test]
    fn l_shape_keeps_six_corners() {
        let mut b = Bitmap::new(14, 14).unwrap();
        b.fill_rect(Rect::new(2, 2, 3, 10));
        b.fill_rect(Rect::new(2, 9, 8, 3));
        let c = find_contours(&b).remove(0);
        let s = simplify_contour(&c);
        assert!(is_subsequence(&s.points, &c.points));
        // the concave corner (4, 9) is cut by 8-connected tracing; (5, 9) and (4, 8) flank it
        assert_eq!(s.points, Contour::from_coords(&[(2, 2), (2, 11), (9, 11), (9, 9), (5, 9), (4, 8), (4, 2)]).points);
    }

    #[test]
    fn ellipse_is_compressed_and_ordered() {
        let mut b = Bitmap::new(60, 60).unwrap();
        for y in 0..60 {
            for x in 0..60 {
                let (dx, dy) = (x as f64 - 30.0, y as f64 - 30.0);
                if dx * dx / 400.0 + dy * dy / 150.0 < 1.0 {
                    b.set(x, y, true);
                }
            }
        }
        let c = find_contours(&b).remove(0);
        let s = simplify_contour(&c);
        assert!(is_subsequence(&s.points, &c.points));
        assert!(s.len() >= 8 && s.len() * 2 < c.len(), "{} of {}", s.len(), c.len());
    }
}
