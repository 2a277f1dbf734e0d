//! Two-pass 8-connected component labeling with a union-find forest.

use super::{Bitmap, Rect};

/// One 8-connected component; `mask` is cropped to `bbox`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectedComponent {
    /// 1-based position in the (top, left) ordering.
    pub id: usize,
    pub pixel_count: usize,
    pub bbox: Rect,
    pub mask: Bitmap,
}

struct Forest {
    parent: Vec<u32>,
}

impl Forest {
    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        // smaller label wins so roots stay stable in scan order
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Components of `b` under 8-connectivity, ordered by bounding-box top then left.
pub fn label_components(b: &Bitmap) -> Vec<ConnectedComponent> {
    const NONE: u32 = u32::MAX;
    let (w, h) = (b.width(), b.height());
    let bits = b.bits();
    let mut labels = vec![NONE; w * h];
    let mut forest = Forest { parent: Vec::new() };

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let mut label = NONE;
            let mut neighbors = [NONE; 4];
            if x > 0 {
                neighbors[0] = labels[i - 1];
            }
            if y > 0 {
                let up = i - w;
                neighbors[1] = labels[up];
                if x > 0 {
                    neighbors[2] = labels[up - 1];
                }
                if x + 1 < w {
                    neighbors[3] = labels[up + 1];
                }
            }
            for n in neighbors.into_iter().filter(|&n| n != NONE) {
                label = if label == NONE { n } else { forest.union(label, n) };
            }
            labels[i] = if label == NONE { forest.make() } else { label };
        }
    }

    // resolve roots to dense indices and gather statistics
    let mut dense = vec![NONE; forest.parent.len()];
    let mut stats: Vec<(usize, usize, usize, usize, usize)> = Vec::new(); // x0, y0, x1, y1, count
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if labels[i] == NONE {
                continue;
            }
            let root = forest.find(labels[i]) as usize;
            if dense[root] == NONE {
                dense[root] = stats.len() as u32;
                stats.push((x, y, x, y, 0));
            }
            let d = dense[root];
            labels[i] = d;
            let s = &mut stats[d as usize];
            s.0 = s.0.min(x);
            s.1 = s.1.min(y);
            s.2 = s.2.max(x);
            s.3 = s.3.max(y);
            s.4 += 1;
        }
    }

    let mut masks: Vec<Vec<bool>> = stats.iter().map(|s| vec![false; (s.2 - s.0 + 1) * (s.3 - s.1 + 1)]).collect();
    for y in 0..h {
        for x in 0..w {
            let d = labels[y * w + x];
            if d == NONE {
                continue;
            }
            let s = stats[d as usize];
            let mw = s.2 - s.0 + 1;
            masks[d as usize][(y - s.1) * mw + (x - s.0)] = true;
        }
    }

    let mut out: Vec<ConnectedComponent> = stats
        .into_iter()
        .zip(masks)
        .map(|((x0, y0, x1, y1, count), bits)| {
            let bbox = Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
            ConnectedComponent { id: 0, pixel_count: count, bbox, mask: Bitmap::from_raw(bbox.w, bbox.h, bits) }
        })
        .collect();
    out.sort_by_key(|c| (c.bbox.y, c.bbox.x));
    for (i, c) in out.iter_mut().enumerate() {
        c.id = i + 1;
    }
    out
}
