//! Image ingestion, grid seeding and output extraction.

mod curate;
mod metrics;
mod output;
mod raster;

pub use curate::{curate, gradient_magnitude_score, Curation, DEFAULT_CURATION_THRESHOLD};
pub use metrics::{dice, iou, ssim, SSIM_K1, SSIM_K2, SSIM_WINDOW};
pub use output::{extract_depth, extract_segmentation, DepthMap, Mask, SegMask};
pub use raster::{load_gray, load_image, save_gray, save_rgb, write_atomic, BitDepth};

use crate::error::{Error, Result};
use crate::grid::{ChannelGrid, RGB_CHANNELS};
use crate::model::ModelSpec;
use crate::rng::Rng;

/// Interleaved RGB image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl RgbImage {
    /// Builds an image, clamping every value into `[0, 1]` (NaN becomes 0).
    pub fn new(height: usize, width: usize, mut data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width * 3 {
            return Err(Error::Config(format!(
                "rgb image {height}x{width} needs {} values, got {}",
                height * width * 3,
                data.len()
            )));
        }
        for v in &mut data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Ok(Self { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Single-channel float image.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::Config(format!(
                "plane {height}x{width} needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn same_shape(&self, other: &Plane) -> bool {
        self.height == other.height && self.width == other.width
    }
}

/// Bilinear resize with half-pixel centres and edge clamping.
pub fn resize_bilinear(img: &RgbImage, out_h: usize, out_w: usize) -> Result<RgbImage> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Config(format!("resize target {out_h}x{out_w} is empty")));
    }
    if out_h == img.height && out_w == img.width {
        return Ok(img.clone());
    }
    let sy = img.height as f32 / out_h as f32;
    let sx = img.width as f32 / out_w as f32;
    let sample_axis = |dst: usize, scale: f32, len: usize| {
        let src = ((dst as f32 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f32);
        let lo = src.floor() as usize;
        let hi = (lo + 1).min(len - 1);
        (lo, hi, src - lo as f32)
    };

    let mut data = Vec::with_capacity(out_h * out_w * 3);
    for oy in 0..out_h {
        let (y0, y1, fy) = sample_axis(oy, sy, img.height);
        for ox in 0..out_w {
            let (x0, x1, fx) = sample_axis(ox, sx, img.width);
            let (p00, p01) = (img.pixel(y0, x0), img.pixel(y0, x1));
            let (p10, p11) = (img.pixel(y1, x0), img.pixel(y1, x1));
            for c in 0..3 {
                let top = p00[c] + (p01[c] - p00[c]) * fx;
                let bottom = p10[c] + (p11[c] - p10[c]) * fx;
                data.push(top + (bottom - top) * fy);
            }
        }
    }
    RgbImage::new(out_h, out_w, data)
}

/// Initial NCA state: RGB copied into channels 0..3, everything else
/// uniform noise in `[0, 1)` drawn cell by cell, channel by channel.
pub fn seed_state(img: &RgbImage, spec: &ModelSpec, rng: &mut Rng) -> Result<ChannelGrid> {
    let c = spec.channels;
    let mut data = Vec::with_capacity(img.height * img.width * c);
    for px in img.data.chunks_exact(3) {
        data.extend_from_slice(px);
        data.extend((RGB_CHANNELS..c).map(|_| rng.next_f32()));
    }
    ChannelGrid::from_vec(img.height, img.width, c, data)
}
