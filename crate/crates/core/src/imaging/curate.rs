use super::DepthMap;
use crate::error::{Error, Result};

pub const DEFAULT_CURATION_THRESHOLD: f64 = 1.1;

/// Flatness score of a pseudo depth map.
///
/// The map is min-max normalized, scaled to `[0, 255]`, and differentiated
/// with central differences (`(m[i+1] - m[i-1]) / 2`, edges replicated). The
/// score is the mean gradient magnitude over all pixels.
pub fn gradient_magnitude_score(map: &DepthMap) -> f64 {
    let norm = map.normalized();
    let (h, w) = (norm.height, norm.width);
    let v = |y: usize, x: usize| 255.0 * norm.at(y, x) as f64;
    let mut total = 0.0;
    for y in 0..h {
        let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = (v(y, xr) - v(y, xl)) / 2.0;
            let gy = (v(yd, x) - v(yu, x)) / 2.0;
            total += (gx * gx + gy * gy).sqrt();
        }
    }
    total / (h * w) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curation {
    /// Indices into the input, in input order.
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Keeps maps whose score is strictly above `threshold`.
pub fn curate(maps: &[DepthMap], threshold: f64) -> Result<Curation> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::Config(format!(
            "curation threshold must be finite and non-negative, got {threshold}"
        )));
    }
    let scores: Vec<f64> = maps.iter().map(gradient_magnitude_score).collect();
    let (accepted, rejected) = (0..maps.len()).partition(|&i| scores[i] > threshold);
    Ok(Curation {
        accepted,
        rejected,
        scores,
    })
}
