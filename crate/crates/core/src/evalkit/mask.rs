use crate::contours::{rasterize_polygon, Contour};
use crate::error::{Error, Result};
use crate::raster::{Bitmap, Rect};

/// Page-sized binary mask stored as its bounding-box crop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    patch: Option<(Rect, Bitmap)>,
    area: usize,
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, patch: None, area: 0 }
    }

    pub fn from_bitmap(b: &Bitmap) -> Self {
        match b.bounds() {
            Some(r) => Self { width: b.width(), height: b.height(), patch: Some((r, b.crop(r))), area: b.count_ones() },
            None => Self::empty(b.width(), b.height()),
        }
    }

    /// Same pixels as [`rasterize_polygon`] on a `width x height` page, rendered only
    /// over the polygon's extent.
    pub fn from_polygon(c: &Contour, width: usize, height: usize) -> Self {
        if c.is_empty() || width == 0 || height == 0 {
            return Self::empty(width, height);
        }
        let clamped = Contour::new(
            c.points
                .iter()
                .map(|p| crate::contours::Point::new(p.x.clamp(0, width as i32 - 1), p.y.clamp(0, height as i32 - 1)))
                .collect(),
        );
        let (x0, y0, x1, y1) = clamped.extent().expect("non-empty");
        let local = rasterize_polygon(&clamped.translated(-x0, -y0), (x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
        let mut m = Self::from_bitmap(&local);
        m.width = width;
        m.height = height;
        if let Some((r, _)) = &mut m.patch {
            r.x += x0 as usize;
            r.y += y0 as usize;
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.area
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        match &self.patch {
            Some((r, b)) if x >= r.x && y >= r.y && x < r.right() && y < r.bottom() => b.get(x - r.x, y - r.y),
            _ => false,
        }
    }

    pub fn to_bitmap(&self) -> Bitmap {
        let mut out = Bitmap::new(self.width.max(1), self.height.max(1)).expect("positive dimensions");
        if let Some((r, b)) = &self.patch {
            out.paste_or(b, r.x, r.y);
        }
        out
    }

    pub fn intersection(&self, other: &Mask) -> usize {
        let (Some((ra, a)), Some((rb, b))) = (&self.patch, &other.patch) else {
            return 0;
        };
        let (x0, y0) = (ra.x.max(rb.x), ra.y.max(rb.y));
        let (x1, y1) = (ra.right().min(rb.right()), ra.bottom().min(rb.bottom()));
        let mut n = 0;
        for y in y0..y1 {
            for x in x0..x1 {
                if a.get(x - ra.x, y - ra.y) && b.get(x - rb.x, y - rb.y) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Intersection over union; 0 when both are empty.
    pub fn iou(&self, other: &Mask) -> Result<f64> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} mask vs {}x{} mask",
                self.width, self.height, other.width, other.height
            )));
        }
        let inter = self.intersection(other);
        let union = self.area + other.area - inter;
        Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
    }
}

/// `|a ∩ b| / |a ∪ b|` over two equally sized bitmaps; 0 when both are empty.
pub fn mask_iou(a: &Bitmap, b: &Bitmap) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} mask vs {}x{} mask",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let inter = a.intersection_count(b);
    let union = a.count_ones() + b.count_ones() - inter;
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}
