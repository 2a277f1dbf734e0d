use std::path::PathBuf;

use crate::raster::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("buffer of {len} values does not match {width}x{height}")]
    BufferSize { width: usize, height: usize, len: usize },

    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("label image has {} illegal pixel(s){}", .0.len(), first_violation(.0))]
    InvalidLabelImage(Vec<Violation>),

    #[error("{0} is not a legal class code")]
    IllegalClassCode(u8),

    #[error("contour type {p}-{q} would shrink regions (p must be >= q)")]
    ShrinkingContourSpec { p: usize, q: usize },

    #[error("invalid class table: {0}")]
    ClassTable(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("polygon needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("missing or malformed field `{0}`")]
    MissingField(String),

    #[error("annotation references unknown category id {0}")]
    UnknownCategory(u64),

    #[error("annotation references unknown image id {0}")]
    UnknownImage(u64),

    #[error("ground truth contains no instances; AP is undefined")]
    EmptyGroundTruth,

    #[error("detection score {0} is outside [0, 1]")]
    InvalidScore(f64),

    #[error("IoU thresholds must include {0}")]
    MissingThreshold(f64),

    #[error("grid cell ({i}, {j}) is outside a {s}x{s} grid")]
    GridIndex { i: usize, j: usize, s: usize },

    #[error("tensor shape mismatch: {0}")]
    Shape(String),

    #[error("tensor contains a non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn first_violation(v: &[Violation]) -> String {
    match v.first() {
        Some(first) => format!(", first at ({}, {}) with value {}", first.x, first.y, first.value),
        None => String::new(),
    }
}
