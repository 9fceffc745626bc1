use std::io::{Cursor, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use super::{Plane, RgbImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

fn image_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn open(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = ImageFormat::from_path(path)
        .or_else(|_| image::guess_format(&bytes))
        .map_err(|e| image_err(path, e))?;
    image::load_from_memory_with_format(&bytes, format).map_err(|e| image_err(path, e))
}

/// Reads PNG or PNM as RGB in `[0, 1]`. 16-bit sources keep full precision.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = open(path)?.to_rgb32f();
    let (w, h) = img.dimensions();
    RgbImage::new(h as usize, w as usize, img.into_raw())
}

/// Reads a single-channel map (colour inputs are converted to luma).
pub fn load_gray(path: impl AsRef<Path>) -> Result<Plane> {
    let path = path.as_ref();
    let img = open(path)?.to_luma32f();
    let (w, h) = img.dimensions();
    Plane::new(h as usize, w as usize, img.into_raw())
}

fn output_format(path: &Path) -> Result<ImageFormat> {
    match ImageFormat::from_path(path) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Pnm)) => Ok(f),
        _ => Err(image_err(path, "output must be .png, .pgm or .ppm")),
    }
}

fn encode(path: &Path, img: DynamicImage) -> Result<Vec<u8>> {
    let format = output_format(path)?;
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, format).map_err(|e| image_err(path, e))?;
    Ok(buf.into_inner())
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place,
/// so a failed run never leaves a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Saves a `[0, 1]` map as 8- or 16-bit grayscale (values are clamped and rounded).
pub fn save_gray(path: impl AsRef<Path>, map: &Plane, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (map.width as u32, map.height as u32);
    let img = match depth {
        BitDepth::Eight => {
            let raw = map.data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
            DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).unwrap())
        }
        BitDepth::Sixteen => {
            let raw = map
                .data
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
                .collect();
            DynamicImage::ImageLuma16(ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).unwrap())
        }
    };
    write_atomic(path, &encode(path, img)?)
}

pub fn save_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let raw = img.data().iter().map(|v| (v * 255.0).round() as u8).collect();
    let buf = ImageBuffer::<Rgb<u8>, _>::from_raw(img.width() as u32, img.height() as u32, raw).unwrap();
    write_atomic(path, &encode(path, DynamicImage::ImageRgb8(buf))?)
}
