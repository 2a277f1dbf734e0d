//! Semi-automatic fine-grained text-line annotation for historical document pages,
//! COCO-protocol mask evaluation, and a desk-scale model of a grid-based
//! dynamic-kernel instance-segmentation head.
//!
//! The annotation pipeline takes a class-coded intensity image (line `i` encoded as
//! `20 * i`, left/right titles as 180/200), expands each class with `p` dilations and
//! `q` erosions, traces and simplifies one polygon per connected component and emits
//! labelme and COCO JSON. See [`annotate::generate_annotations`].

pub mod annotate;
pub mod contours;
pub mod error;
pub mod evalkit;
pub mod raster;
pub mod scalar;
pub mod solohead;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GrayRaster32 = raster::GrayRaster<f32>;
pub type GrayRaster64 = raster::GrayRaster<f64>;

pub type Tensor32 = solohead::Tensor<f32>;
pub type Tensor64 = solohead::Tensor<f64>;
pub type LossConfig32 = solohead::LossConfig<f32>;
pub type LossConfig64 = solohead::LossConfig<f64>;
