//! 8-bit single-channel PNG/PGM reading and writing. The format follows the file
//! extension; bitmaps are stored as 0/255.

use std::path::Path;

use image::{GrayImage, ImageFormat};

use super::{Bitmap, LabelImage};
use crate::error::{Error, Result};

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image { path: path.to_path_buf(), source }
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("pgm") | Some("pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::Image {
            path: path.to_path_buf(),
            source: image::ImageError::Unsupported(image::error::UnsupportedError::from_format_and_kind(
                image::error::ImageFormatHint::PathExtension(path.to_path_buf()),
                image::error::UnsupportedErrorKind::Format(image::error::ImageFormatHint::Unknown),
            )),
        }),
    }
}

/// Reads a grayscale raster. Colour inputs are converted to luma, so a gray-valued
/// RGB file keeps its codes; anything else shows up in validation.
pub fn read_label_image(path: &Path) -> Result<LabelImage> {
    let img = image::open(path).map_err(image_err(path))?.into_luma8();
    let (w, h) = img.dimensions();
    LabelImage::new(w as usize, h as usize, img.into_raw())
}

pub fn write_label_image(path: &Path, img: &LabelImage) -> Result<()> {
    let format = format_for(path)?;
    let buf = GrayImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .expect("buffer length checked at construction");
    buf.save_with_format(path, format).map_err(image_err(path))
}

/// Any non-zero pixel reads as set.
pub fn read_bitmap(path: &Path) -> Result<Bitmap> {
    let img = read_label_image(path)?;
    Bitmap::from_bits(img.width(), img.height(), img.data().iter().map(|&v| v != 0).collect())
}

pub fn write_bitmap(path: &Path, b: &Bitmap) -> Result<()> {
    let data = b.bits().iter().map(|&s| if s { 255 } else { 0 }).collect();
    write_label_image(path, &LabelImage::new(b.width(), b.height(), data)?)
}
