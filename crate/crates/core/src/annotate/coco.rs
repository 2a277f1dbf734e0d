use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::{AnnotationSet, ClassTable, ContourSpec, RegionInstance};
use crate::contours::{Contour, Point};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct Info<'a> {
    description: &'a str,
    contour_type: String,
    opening: bool,
}

#[derive(Serialize)]
struct Image<'a> {
    id: u64,
    file_name: &'a str,
    width: usize,
    height: usize,
}

#[derive(Serialize)]
struct Annotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    segmentation: [Vec<i32>; 1],
    area: u64,
    bbox: [i32; 4],
    iscrowd: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

#[derive(Serialize)]
struct Category<'a> {
    id: u64,
    name: &'a str,
    supercategory: &'a str,
}

#[derive(Serialize)]
struct Document<'a> {
    info: Info<'a>,
    images: Vec<Image<'a>>,
    annotations: Vec<Annotation>,
    categories: Vec<Category<'a>>,
}

/// COCO instance document for a single page.
pub fn emit_coco(a: &AnnotationSet) -> String {
    emit_coco_dataset(std::slice::from_ref(a))
}

/// COCO instance document for many pages. Pages are ordered by image id and
/// annotation ids run from 1 in that order, so the output does not depend on the
/// order of `sets`. The contour type recorded in `info` is that of the first page.
pub fn emit_coco_dataset(sets: &[AnnotationSet]) -> String {
    let mut order: Vec<&AnnotationSet> = sets.iter().collect();
    order.sort_by(|l, r| l.image_id.cmp(&r.image_id).then_with(|| l.image_path.cmp(&r.image_path)));
    let spec = order.first().map(|s| s.spec).unwrap_or_default();
    let table = ClassTable::standard();

    let mut annotations = Vec::new();
    for set in &order {
        for inst in &set.instances {
            annotations.push(Annotation {
                id: annotations.len() as u64 + 1,
                image_id: set.image_id,
                category_id: inst.category_id,
                segmentation: [inst.polygon.points.iter().flat_map(|p| [p.x, p.y]).collect()],
                area: inst.area,
                bbox: inst.bbox,
                iscrowd: 0,
                score: inst.score,
            });
        }
    }
    let doc = Document {
        info: Info { description: "text-line instances", contour_type: spec.to_string(), opening: spec.apply_opening },
        images: order
            .iter()
            .map(|s| Image { id: s.image_id, file_name: &s.image_path, width: s.width, height: s.height })
            .collect(),
        annotations,
        categories: table
            .entries()
            .iter()
            .map(|e| Category { id: e.category_id, name: &e.name, supercategory: "text" })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

/// A parsed COCO instance file: its category list and one set per image, ordered by
/// image id.
#[derive(Debug, Clone, PartialEq)]
pub struct CocoDataset {
    pub categories: Vec<(u64, String)>,
    pub sets: Vec<AnnotationSet>,
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::MissingField(format!("{path}.{key}")))
}

fn u64_field(v: &Value, key: &str, path: &str) -> Result<u64> {
    field(v, key, path)?.as_u64().ok_or_else(|| Error::MissingField(format!("{path}.{key}")))
}

fn f64_field(v: &Value, key: &str, path: &str) -> Result<f64> {
    field(v, key, path)?.as_f64().ok_or_else(|| Error::MissingField(format!("{path}.{key}")))
}

fn str_field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a str> {
    field(v, key, path)?.as_str().ok_or_else(|| Error::MissingField(format!("{path}.{key}")))
}

fn array<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Vec<Value>> {
    field(v, key, path)?.as_array().ok_or_else(|| Error::MissingField(format!("{path}.{key}")))
}

fn coord(v: &Value, path: &str) -> Result<i32> {
    v.as_f64().map(|f| f.round() as i32).ok_or_else(|| Error::MissingField(path.to_string()))
}

fn parse_spec(doc: &Value) -> Result<ContourSpec> {
    let Some(info) = doc.get("info") else {
        return Ok(ContourSpec::default());
    };
    let mut spec = match info.get("contour_type").and_then(Value::as_str) {
        Some(s) => s.parse()?,
        None => ContourSpec::default(),
    };
    if let Some(opening) = info.get("opening") {
        spec.apply_opening = opening.as_bool().ok_or_else(|| Error::MissingField("$.info.opening".into()))?;
    }
    Ok(spec)
}

/// Parses a COCO instance document. Annotations keep their file order within an
/// image; group ids are reassigned per image and category in that order, which
/// inverts [`emit_coco`]. A `score` on an annotation is kept.
pub fn parse_coco(text: &str) -> Result<CocoDataset> {
    let doc: Value = serde_json::from_str(text)?;
    let spec = parse_spec(&doc)?;

    let mut categories = Vec::new();
    for (i, c) in array(&doc, "categories", "$")?.iter().enumerate() {
        let path = format!("$.categories[{i}]");
        categories.push((u64_field(c, "id", &path)?, str_field(c, "name", &path)?.to_string()));
    }

    let mut sets = BTreeMap::new();
    for (i, im) in array(&doc, "images", "$")?.iter().enumerate() {
        let path = format!("$.images[{i}]");
        let id = u64_field(im, "id", &path)?;
        sets.insert(
            id,
            AnnotationSet {
                image_id: id,
                image_path: im.get("file_name").and_then(Value::as_str).unwrap_or_default().to_string(),
                width: u64_field(im, "width", &path)? as usize,
                height: u64_field(im, "height", &path)? as usize,
                instances: Vec::new(),
                spec,
            },
        );
    }

    for (i, ann) in array(&doc, "annotations", "$")?.iter().enumerate() {
        let path = format!("$.annotations[{i}]");
        let image_id = u64_field(ann, "image_id", &path)?;
        let category_id = u64_field(ann, "category_id", &path)?;
        let name = categories
            .iter()
            .find(|(id, _)| *id == category_id)
            .map(|(_, n)| n.clone())
            .ok_or(Error::UnknownCategory(category_id))?;

        let seg_path = format!("{path}.segmentation");
        let polys = array(ann, "segmentation", &path)?;
        let [poly] = polys.as_slice() else {
            return Err(Error::MissingField(format!("{seg_path} (one polygon expected)")));
        };
        let flat = poly.as_array().ok_or_else(|| Error::MissingField(format!("{seg_path}[0]")))?;
        if flat.len() % 2 != 0 {
            return Err(Error::MissingField(format!("{seg_path}[0] (odd coordinate count)")));
        }
        let points = flat
            .chunks_exact(2)
            .enumerate()
            .map(|(k, xy)| {
                Ok(Point::new(
                    coord(&xy[0], &format!("{seg_path}[0][{}]", 2 * k))?,
                    coord(&xy[1], &format!("{seg_path}[0][{}]", 2 * k + 1))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        let bbox_vals = array(ann, "bbox", &path)?;
        if bbox_vals.len() != 4 {
            return Err(Error::MissingField(format!("{path}.bbox")));
        }
        let mut bbox = [0i32; 4];
        for (k, v) in bbox_vals.iter().enumerate() {
            bbox[k] = coord(v, &format!("{path}.bbox[{k}]"))?;
        }
        let area = f64_field(ann, "area", &path)?.round().max(0.0) as u64;
        let score = match ann.get("score") {
            Some(s) => Some(s.as_f64().ok_or_else(|| Error::MissingField(format!("{path}.score")))?),
            None => None,
        };

        let set = sets.get_mut(&image_id).ok_or(Error::UnknownImage(image_id))?;
        let group_id = set.instances.iter().filter(|r| r.category_id == category_id).count() as u32 + 1;
        set.instances.push(RegionInstance {
            class_name: name,
            category_id,
            group_id,
            polygon: Contour::new(points),
            area,
            bbox,
            score,
            component: None,
        });
    }

    Ok(CocoDataset { categories, sets: sets.into_values().collect() })
}
