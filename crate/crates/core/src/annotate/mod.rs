//! Page annotation: split an intensity image by class, expand each class region,
//! trace and simplify one polygon per connected component, and serialize the result
//! as labelme or COCO JSON.

mod coco;
mod labelme;

pub use coco::{emit_coco, emit_coco_dataset, parse_coco, CocoDataset};
pub use labelme::{emit_labelme, LabelmeDocument, LabelmeShape};

use std::fmt;
use std::str::FromStr;

use crate::contours::{find_contours, simplify_contour, Contour};
use crate::error::{Error, Result};
use crate::raster::{
    expand_region, label_components, resize_nearest, validate_with_codes, Bitmap, ConnectedComponent, LabelImage, Rect,
};

/// Default page size `(width, height)` after resizing.
pub const DEFAULT_TARGET: (usize, usize) = (2496, 800);

/// Contour type `p-q`: `p` dilations followed by `q` erosions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContourSpec {
    pub p: usize,
    pub q: usize,
    pub apply_opening: bool,
}

impl ContourSpec {
    /// The eight studied contour types.
    pub const TYPES: [(usize, usize); 8] = [(6, 0), (6, 2), (6, 4), (6, 6), (10, 4), (10, 6), (10, 8), (10, 10)];

    pub fn new(p: usize, q: usize, apply_opening: bool) -> Result<Self> {
        if p < q {
            return Err(Error::ShrinkingContourSpec { p, q });
        }
        Ok(Self { p, q, apply_opening })
    }

    /// Boundary growth in pixels.
    pub fn expansion(&self) -> usize {
        self.p - self.q
    }

    pub fn all_types(apply_opening: bool) -> impl Iterator<Item = ContourSpec> {
        Self::TYPES.into_iter().map(move |(p, q)| ContourSpec { p, q, apply_opening })
    }
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self { p: 10, q: 4, apply_opening: true }
    }
}

impl fmt::Display for ContourSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.p, self.q)
    }
}

/// Parses `"p-q"`; the opening flag defaults to on.
impl FromStr for ContourSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MissingField(format!("contour type `{s}` (expected p-q)"));
        let (p, q) = s.split_once('-').ok_or_else(bad)?;
        let p = p.trim().parse().map_err(|_| bad())?;
        let q = q.trim().parse().map_err(|_| bad())?;
        ContourSpec::new(p, q, true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub name: String,
    pub code: u8,
    pub category_id: u64,
}

/// The ten annotation classes in emission order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    entries: Vec<ClassEntry>,
}

impl ClassTable {
    pub const LEN: usize = 10;

    /// `line1..line8` with codes `20..160`, then `ltitle` (180) and `rtitle` (200);
    /// category ids `1..10`.
    pub fn standard() -> Self {
        let mut entries: Vec<ClassEntry> = (1..=8u8)
            .map(|i| ClassEntry { name: format!("line{i}"), code: 20 * i, category_id: u64::from(i) })
            .collect();
        entries.push(ClassEntry { name: "ltitle".into(), code: 180, category_id: 9 });
        entries.push(ClassEntry { name: "rtitle".into(), code: 200, category_id: 10 });
        Self { entries }
    }

    pub fn new(entries: Vec<ClassEntry>) -> Result<Self> {
        if entries.len() != Self::LEN {
            return Err(Error::ClassTable(format!("expected {} classes, got {}", Self::LEN, entries.len())));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.code == 0 {
                return Err(Error::ClassTable(format!("class `{}` uses the background code 0", e.name)));
            }
            for other in &entries[..i] {
                if other.name == e.name {
                    return Err(Error::ClassTable(format!("duplicate class name `{}`", e.name)));
                }
                if other.code == e.code {
                    return Err(Error::ClassTable(format!("duplicate code {}", e.code)));
                }
                if other.category_id == e.category_id {
                    return Err(Error::ClassTable(format!("duplicate category id {}", e.category_id)));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn codes(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.code).collect()
    }

    pub fn by_category(&self, id: u64) -> Option<&ClassEntry> {
        self.entries.iter().find(|e| e.category_id == id)
    }

    pub fn by_name(&self, name: &str) -> Option<&ClassEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

impl Default for ClassTable {
    fn default() -> Self {
        Self::standard()
    }
}

/// Tight `[x, y, w, h]` box of a polygon, `w = max_x - min_x`.
pub fn polygon_bbox(c: &Contour) -> [i32; 4] {
    match c.extent() {
        Some((x0, y0, x1, y1)) => [x0, y0, x1 - x0, y1 - y0],
        None => [0, 0, 0, 0],
    }
}

/// One connected component of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionInstance {
    pub class_name: String,
    pub category_id: u64,
    /// 1-based ordinal within the class on its page.
    pub group_id: u32,
    pub polygon: Contour,
    /// Pixel count of the expanded component.
    pub area: u64,
    pub bbox: [i32; 4],
    pub score: Option<f64>,
    /// The expanded component itself; not serialized.
    pub component: Option<ConnectedComponent>,
}

impl RegionInstance {
    /// Full-page mask of the expanded component, if it is still attached.
    pub fn component_mask(&self, width: usize, height: usize) -> Option<Bitmap> {
        let cc = self.component.as_ref()?;
        let mut out = Bitmap::new(width, height).ok()?;
        out.paste_or(&cc.mask, cc.bbox.x, cc.bbox.y);
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub image_id: u64,
    pub image_path: String,
    pub width: usize,
    pub height: usize,
    pub instances: Vec<RegionInstance>,
    pub spec: ContourSpec,
}

impl AnnotationSet {
    pub fn with_image(mut self, image_id: u64, image_path: impl Into<String>) -> Self {
        self.image_id = image_id;
        self.image_path = image_path.into();
        self
    }

    /// Drops the attached components, leaving what survives serialization.
    pub fn without_components(&self) -> Self {
        let mut out = self.clone();
        for inst in &mut out.instances {
            inst.component = None;
        }
        out
    }
}

/// [`generate_with_table`] with the standard class table.
pub fn generate_annotations(img: &LabelImage, spec: ContourSpec, target: (usize, usize)) -> Result<AnnotationSet> {
    generate_with_table(img, spec, target, &ClassTable::standard())
}

/// Resizes `img` to `target` (nearest neighbor), then for every class expands its
/// pixels, labels the components and traces one simplified polygon per component.
/// Instances come out in class-table order; within a class, group ids follow reading
/// order (bounding-box left edge, then top edge).
pub fn generate_with_table(
    img: &LabelImage,
    spec: ContourSpec,
    target: (usize, usize),
    table: &ClassTable,
) -> Result<AnnotationSet> {
    let (tw, th) = target;
    if tw == 0 || th == 0 {
        return Err(Error::EmptyImage { width: tw, height: th });
    }
    let spec = ContourSpec::new(spec.p, spec.q, spec.apply_opening)?;
    let violations = validate_with_codes(img, &table.codes());
    if !violations.is_empty() {
        return Err(Error::InvalidLabelImage(violations));
    }
    let img = resize_nearest(img, tw, th);

    let mut instances = Vec::new();
    for entry in table.entries() {
        let Some(bounds) = img.code_bounds(entry.code) else {
            continue;
        };
        let window = bounds.padded(spec.p + 1, tw, th);
        let mut local = Bitmap::new(window.w, window.h)?;
        for y in 0..window.h {
            for x in 0..window.w {
                if img.get(window.x + x, window.y + y) == entry.code {
                    local.set(x, y, true);
                }
            }
        }
        let expanded = expand_region(&local, spec.p, spec.q, spec.apply_opening)?;
        let mut components = label_components(&expanded);
        components.sort_by_key(|cc| (cc.bbox.x, cc.bbox.y));
        for (n, mut cc) in components.into_iter().enumerate() {
            cc.bbox = Rect::new(cc.bbox.x + window.x, cc.bbox.y + window.y, cc.bbox.w, cc.bbox.h);
            let polygon = trace_component(&cc);
            instances.push(RegionInstance {
                class_name: entry.name.clone(),
                category_id: entry.category_id,
                group_id: n as u32 + 1,
                bbox: polygon_bbox(&polygon),
                polygon,
                area: cc.pixel_count as u64,
                score: None,
                component: Some(cc),
            });
        }
    }
    Ok(AnnotationSet { image_id: 0, image_path: String::new(), width: tw, height: th, instances, spec })
}

/// Simplified outer contour of a component, in page coordinates.
pub fn trace_component(cc: &ConnectedComponent) -> Contour {
    let mut padded = Bitmap::new(cc.bbox.w + 2, cc.bbox.h + 2).expect("positive dimensions");
    padded.paste_or(&cc.mask, 1, 1);
    let outer = find_contours(&padded).into_iter().next().expect("component has an outer border");
    simplify_contour(&outer).translated(cc.bbox.x as i32 - 1, cc.bbox.y as i32 - 1)
}
