use serde::{Deserialize, Serialize};

use super::AnnotationSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelmeShape {
    pub label: String,
    pub points: Vec<[i32; 2]>,
    pub group_id: u32,
    pub shape_type: String,
    pub flags: serde_json::Map<String, serde_json::Value>,
}

/// labelme page document; fields serialize in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelmeDocument {
    pub version: String,
    pub flags: serde_json::Map<String, serde_json::Value>,
    pub shapes: Vec<LabelmeShape>,
    pub image_path: String,
    pub image_data: Option<String>,
    pub image_height: usize,
    pub image_width: usize,
}

impl LabelmeDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// One polygon shape per instance, in instance order.
pub fn emit_labelme(a: &AnnotationSet) -> LabelmeDocument {
    LabelmeDocument {
        version: "5.0.1".into(),
        flags: Default::default(),
        shapes: a
            .instances
            .iter()
            .map(|inst| LabelmeShape {
                label: inst.class_name.clone(),
                points: inst.polygon.points.iter().map(|p| [p.x, p.y]).collect(),
                group_id: inst.group_id,
                shape_type: "polygon".into(),
                flags: Default::default(),
            })
            .collect(),
        image_path: a.image_path.clone(),
        image_data: None,
        image_height: a.height,
        image_width: a.width,
    }
}
