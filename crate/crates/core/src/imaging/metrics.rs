use super::{Mask, Plane};
use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 7;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn overlap(pred: &Mask, gt: &Mask) -> Result<(usize, usize, usize)> {
    if pred.height != gt.height || pred.width != gt.width {
        return Err(Error::Contract(format!(
            "mask shapes differ: {}x{} vs {}x{}",
            pred.height, pred.width, gt.height, gt.width
        )));
    }
    let inter = pred.data.iter().zip(&gt.data).filter(|(&a, &b)| a && b).count();
    Ok((inter, pred.count(), gt.count()))
}

/// `2|A∩B| / (|A|+|B|)`, 1.0 when both masks are empty.
pub fn dice(pred: &Mask, gt: &Mask) -> Result<f64> {
    let (inter, a, b) = overlap(pred, gt)?;
    if a + b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (a + b) as f64)
}

/// `|A∩B| / |A∪B|`, 1.0 when both masks are empty.
pub fn iou(pred: &Mask, gt: &Mask) -> Result<f64> {
    let (inter, a, b) = overlap(pred, gt)?;
    let union = a + b - inter;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Summed-area table with a zero border row and column.
struct Integral {
    stride: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(h: usize, w: usize, f: impl Fn(usize) -> f64) -> Self {
        let stride = w + 1;
        let mut sums = vec![0.0; (h + 1) * stride];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += f(y * w + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    fn window(&self, y: usize, x: usize, size_y: usize, size_x: usize) -> f64 {
        let s = self.stride;
        let (y1, x1) = (y + size_y, x + size_x);
        self.sums[y1 * s + x1] - self.sums[y * s + x1] - self.sums[y1 * s + x] + self.sums[y * s + x]
    }
}

/// Mean single-scale SSIM over all fully-contained 7×7 windows (uniform
/// weights, population statistics, dynamic range 1). Images smaller than the
/// window use a window clipped to the image size.
pub fn ssim(a: &Plane, b: &Plane) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::Contract(format!(
            "ssim shapes differ: {}x{} vs {}x{}",
            a.height, a.width, b.height, b.width
        )));
    }
    let (h, w) = (a.height, a.width);
    let wy = SSIM_WINDOW.min(h);
    let wx = SSIM_WINDOW.min(w);
    let n = (wy * wx) as f64;
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);

    let av = |i: usize| a.data[i] as f64;
    let bv = |i: usize| b.data[i] as f64;
    let sa = Integral::new(h, w, av);
    let sb = Integral::new(h, w, bv);
    let saa = Integral::new(h, w, |i| av(i) * av(i));
    let sbb = Integral::new(h, w, |i| bv(i) * bv(i));
    let sab = Integral::new(h, w, |i| av(i) * bv(i));

    let mut total = 0.0;
    let mut windows = 0usize;
    for y in 0..=h - wy {
        for x in 0..=w - wx {
            let mu_a = sa.window(y, x, wy, wx) / n;
            let mu_b = sb.window(y, x, wy, wx) / n;
            let var_a = (saa.window(y, x, wy, wx) / n - mu_a * mu_a).max(0.0);
            let var_b = (sbb.window(y, x, wy, wx) / n - mu_b * mu_b).max(0.0);
            let cov = sab.window(y, x, wy, wx) / n - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}
