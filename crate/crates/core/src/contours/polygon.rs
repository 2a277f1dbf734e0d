//! Shoelace area and scanline polygon fill.

use super::{Contour, Point};
use crate::error::{Error, Result};
use crate::raster::Bitmap;

/// Twice the signed shoelace area in raw pixel coordinates (y down). Traced
/// contours are counter-clockwise as displayed, which makes this non-positive.
pub fn signed_area_doubled(c: &Contour) -> i64 {
    let n = c.points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (c.points[i], c.points[(i + 1) % n]);
            i64::from(a.x) * i64::from(b.y) - i64::from(b.x) * i64::from(a.y)
        })
        .sum()
}

/// Absolute shoelace area of the polygon through the contour points.
pub fn polygon_area(c: &Contour) -> Result<f64> {
    if c.points.len() < 3 {
        return Err(Error::TooFewPoints(c.points.len()));
    }
    Ok(signed_area_doubled(c).unsigned_abs() as f64 / 2.0)
}

/// Fills the polygon into a `width x height` bitmap; vertices are pixel centers and
/// are clamped into the image first.
///
/// A pixel is set when its center lies strictly inside under the even-odd rule
/// (crossings taken on a half-open `[y_min, y_max)` span per edge, so shared vertices
/// count once), or when it lies on the Bresenham rasterization of an edge. Boundary
/// pixels are therefore always included and collinear input yields a 1-pixel line.
pub fn rasterize_polygon(c: &Contour, width: usize, height: usize) -> Bitmap {
    let mut out = Bitmap::new(width.max(1), height.max(1)).expect("positive dimensions");
    if c.points.is_empty() {
        return out;
    }
    let clamp = |p: &Point| Point::new(p.x.clamp(0, width as i32 - 1), p.y.clamp(0, height as i32 - 1));
    let pts: Vec<Point> = c.points.iter().map(clamp).collect();
    let n = pts.len();

    let mut crossings: Vec<(i64, i64)> = Vec::new();
    for y in 0..height as i64 {
        crossings.clear();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (ay, by) = (i64::from(a.y), i64::from(b.y));
            if ay == by || y < ay.min(by) || y >= ay.max(by) {
                continue;
            }
            // x = a.x + (y - a.y) (b.x - a.x) / (b.y - a.y), kept as an exact fraction
            let mut den = by - ay;
            let mut num = i64::from(a.x) * den + (y - ay) * i64::from(b.x - a.x);
            if den < 0 {
                den = -den;
                num = -num;
            }
            crossings.push((num, den));
        }
        crossings.sort_by(|l, r| (l.0 as i128 * r.1 as i128).cmp(&(r.0 as i128 * l.1 as i128)));
        for pair in crossings.chunks_exact(2) {
            let x0 = ceil_div(pair[0].0, pair[0].1);
            let x1 = pair[1].0.div_euclid(pair[1].1);
            for x in x0.max(0)..=x1.min(width as i64 - 1) {
                out.set(x as usize, y as usize, true);
            }
        }
    }

    for i in 0..n {
        draw_line(&mut out, pts[i], pts[(i + 1) % n]);
    }
    out
}

fn ceil_div(num: i64, den: i64) -> i64 {
    -((-num).div_euclid(den))
}

fn draw_line(b: &mut Bitmap, from: Point, to: Point) {
    let (mut x, mut y) = (from.x, from.y);
    let dx = (to.x - from.x).abs();
    let dy = -(to.y - from.y).abs();
    let sx = if from.x < to.x { 1 } else { -1 };
    let sy = if from.y < to.y { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        b.set(x as usize, y as usize, true);
        if x == to.x && y == to.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
