//! Border following, dominant-point simplification and polygon utilities.

mod polygon;
mod simplify;

pub use polygon::{polygon_area, rasterize_polygon, signed_area_doubled};
pub use simplify::{simplify_contour, MAX_DEVIATION};

use crate::raster::Bitmap;

/// Integer pixel coordinate; `y` grows downwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    /// Chebyshev distance.
    pub fn chessboard(self, other: Point) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Closed polygon over pixel centers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Contour {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points, closed: true }
    }

    pub fn from_coords(coords: &[(i32, i32)]) -> Self {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translated(&self, dx: i32, dy: i32) -> Contour {
        Contour { points: self.points.iter().map(|p| p.offset(dx, dy)).collect(), closed: self.closed }
    }

    /// `(min_x, min_y, max_x, max_y)`, or `None` for an empty contour.
    pub fn extent(&self) -> Option<(i32, i32, i32, i32)> {
        let first = self.points.first()?;
        Some(self.points.iter().fold((first.x, first.y, first.x, first.y), |(x0, y0, x1, y1), p| {
            (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y))
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderKind {
    Outer,
    Hole,
}

/// A border found by [`find_borders`]; `parent` indexes into the same result vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Border {
    pub kind: BorderKind,
    pub parent: Option<usize>,
    pub contour: Contour,
}

/// Neighbor offsets in clockwise order as displayed (y down), starting east.
const DIRS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

fn dir_index(dx: i32, dy: i32) -> usize {
    DIRS.iter().position(|&d| d == (dx, dy)).expect("8-neighbor offset")
}

/// Suzuki-Abe border following under 8-connectivity: every outer and hole border in
/// raster-scan order of their starting pixels, with the nesting hierarchy.
pub fn find_borders(b: &Bitmap) -> Vec<Border> {
    let (w, h) = (b.width() as i32, b.height() as i32);
    // one-pixel zero frame; the frame itself plays the role of border number 1
    let pw = (w + 2) as usize;
    let mut f = vec![0i32; pw * (h + 2) as usize];
    for (x, y) in b.set_positions() {
        f[(y + 1) * pw + x + 1] = 1;
    }
    let at = |x: i32, y: i32| (y + 1) as usize * pw + (x + 1) as usize;

    let mut borders: Vec<Border> = Vec::new();
    // kinds[n - 2] / parent of border number n; number 1 is the frame
    let mut nbd: i32 = 1;

    for y in 0..h {
        let mut lnbd: i32 = 1;
        for x in 0..w {
            let v = f[at(x, y)];
            if v == 0 {
                continue;
            }
            let start = if v == 1 && f[at(x - 1, y)] == 0 {
                Some((BorderKind::Outer, (x - 1, y)))
            } else if v >= 1 && f[at(x + 1, y)] == 0 {
                if v > 1 {
                    lnbd = v;
                }
                Some((BorderKind::Hole, (x + 1, y)))
            } else {
                None
            };

            if let Some((kind, (x2, y2))) = start {
                nbd += 1;
                let parent = if lnbd <= 1 {
                    None
                } else {
                    let idx = (lnbd - 2) as usize;
                    if kind != borders[idx].kind {
                        Some(idx)
                    } else {
                        borders[idx].parent
                    }
                };
                let points = follow(&mut f, pw, (x, y), (x2, y2), nbd);
                borders.push(Border { kind, parent, contour: Contour::new(points) });
            }

            let v = f[at(x, y)];
            if v != 1 {
                lnbd = v.abs();
            }
        }
    }
    borders
}

fn follow(f: &mut [i32], pw: usize, start: (i32, i32), from: (i32, i32), nbd: i32) -> Vec<Point> {
    let at = |x: i32, y: i32| (y + 1) as usize * pw + (x + 1) as usize;
    let (x0, y0) = start;

    // clockwise search around the start pixel for any non-zero neighbor
    let d0 = dir_index(from.0 - x0, from.1 - y0);
    let first = (0..8).map(|k| (d0 + k) % 8).find_map(|d| {
        let (nx, ny) = (x0 + DIRS[d].0, y0 + DIRS[d].1);
        (f[at(nx, ny)] != 0).then_some((nx, ny))
    });
    let Some(p1) = first else {
        f[at(x0, y0)] = -nbd;
        return vec![Point::new(x0, y0)];
    };

    let mut points = Vec::new();
    let mut p2 = p1;
    let mut p3 = start;
    loop {
        points.push(Point::new(p3.0, p3.1));
        // counter-clockwise search starting after p2
        let d2 = dir_index(p2.0 - p3.0, p2.1 - p3.1);
        let mut east_zero_examined = false;
        let mut p4 = p2;
        for k in 1..=8 {
            let d = (d2 + 8 - k) % 8;
            let (nx, ny) = (p3.0 + DIRS[d].0, p3.1 + DIRS[d].1);
            if f[at(nx, ny)] != 0 {
                p4 = (nx, ny);
                break;
            }
            if d == 0 {
                east_zero_examined = true;
            }
        }
        let here = at(p3.0, p3.1);
        if east_zero_examined {
            f[here] = -nbd;
        } else if f[here] == 1 {
            f[here] = nbd;
        }
        if p4 == start && p3 == p1 {
            break;
        }
        p2 = p3;
        p3 = p4;
    }
    points
}

/// One outer contour per 8-connected component, each traced counter-clockwise as
/// displayed (negative [`signed_area_doubled`] in pixel coordinates) and starting at the
/// component's topmost-then-leftmost pixel. Hole borders are discarded.
pub fn find_contours(b: &Bitmap) -> Vec<Contour> {
    find_borders(b).into_iter().filter(|border| border.kind == BorderKind::Outer).map(|border| border.contour).collect()
}
