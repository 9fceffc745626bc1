//! Hand-built models and synthetic frames for tests, demos and benchmarks.

use crate::error::{Error, Result};
use crate::imaging::{Mask, RgbImage};
use crate::model::{ModelSpec, Task, TAPS};
use crate::rng::Rng;

/// Logit gain of the toy segmentation target.
pub const SEG_GAIN: f32 = 8.0;

/// A model whose update pulls every non-RGB channel toward a fixed target,
/// `u = rate · (target − state)`, so activity decays geometrically.
///
/// * hidden channel `c` targets `0.5 · mean3x3(c) + 0.5 · rgb[(c − 3) % 3]`
///   (bank A is a box filter),
/// * the output targets `SEG_GAIN · (red − 0.5)` for segmentation or the
///   grey level `(r + g + b) / 3` for depth.
///
/// Each target uses two ReLU units (`relu(t)` and `relu(−t)`), so the model
/// needs `mlp_hidden ≥ 2 · (C − 3)`. Unused units stay zero.
pub fn contracting_model(task: Task, channels: usize, mlp_hidden: usize, rate: f32) -> Result<ModelSpec> {
    let needed = 2 * channels.saturating_sub(3);
    if mlp_hidden < needed {
        return Err(Error::Config(format!(
            "contracting model with {channels} channels needs {needed} hidden units, got {mlp_hidden}"
        )));
    }
    let mut spec = ModelSpec::zeros(task, channels, mlp_hidden);
    spec.validate()?;
    let h = mlp_hidden;
    let c_out = channels - 1;

    // Laplacian in bank B; present so both banks are exercised, unused by the MLP
    let laplace = [0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0];
    for c in 0..channels {
        spec.bank_b[c * TAPS..(c + 1) * TAPS].copy_from_slice(&laplace);
    }

    let set_pair = |unit: usize, target: &[(usize, f32)], bias: f32, channel: usize, spec: &mut ModelSpec| {
        for &(row, w) in target {
            spec.w1[row * h + unit] += w;
            spec.w1[row * h + unit + 1] -= w;
        }
        spec.b1[unit] = bias;
        spec.b1[unit + 1] = -bias;
        spec.w2[unit * channels + channel] = rate;
        spec.w2[(unit + 1) * channels + channel] = -rate;
    };

    for c in 3..c_out {
        spec.bank_a[c * TAPS..(c + 1) * TAPS].fill(1.0 / 9.0);
        let unit = 2 * (c - 3);
        let target = [(c, -1.0), (channels + c, 0.5), ((c - 3) % 3, 0.5)];
        set_pair(unit, &target, 0.0, c, &mut spec);
    }

    let unit = 2 * (c_out - 3);
    match task {
        Task::Segmentation => {
            set_pair(unit, &[(0, SEG_GAIN), (c_out, -1.0)], -SEG_GAIN / 2.0, c_out, &mut spec)
        }
        Task::Depth => set_pair(
            unit,
            &[(0, 1.0 / 3.0), (1, 1.0 / 3.0), (2, 1.0 / 3.0), (c_out, -1.0)],
            0.0,
            c_out,
            &mut spec,
        ),
    }
    Ok(spec)
}

/// Default-dimension toy model for `task` (update rate 0.5).
pub fn toy_model(task: Task) -> ModelSpec {
    contracting_model(task, task.default_channels(), crate::model::DEFAULT_MLP_HIDDEN, 0.5)
        .expect("default dimensions fit")
}

/// One synthetic frame: bright red blobs on a darker textured background,
/// with the blob mask as ground truth.
pub fn blob_frame(height: usize, width: usize, rng: &mut Rng) -> (RgbImage, Mask) {
    let blobs = 1 + (rng.next_u64() % 3) as usize;
    let scale = height.min(width) as f32;
    let centres: Vec<(f32, f32, f32)> = (0..blobs)
        .map(|_| {
            (
                rng.next_f32() * height as f32,
                rng.next_f32() * width as f32,
                scale * (0.08 + 0.12 * rng.next_f32()),
            )
        })
        .collect();
    let phase = rng.next_f32() * std::f32::consts::TAU;
    let freq = 0.2 + 0.3 * rng.next_f32();

    let mut data = Vec::with_capacity(height * width * 3);
    let mut mask = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            let inside = centres.iter().any(|&(cy, cx, r)| {
                let (dy, dx) = (y as f32 + 0.5 - cy, x as f32 + 0.5 - cx);
                dy * dy + dx * dx <= r * r
            });
            let texture = 0.08 * ((x as f32 * freq + phase).sin() * (y as f32 * freq * 0.7).cos());
            let noise = 0.05 * (rng.next_f32() - 0.5);
            let (r, g, b) = if inside {
                (0.85 + texture + noise, 0.15 + noise, 0.12 + noise)
            } else {
                (0.3 + texture + noise, 0.22 + texture + noise, 0.18 + noise)
            };
            data.extend([r, g, b]);
            mask.push(inside);
        }
    }
    (
        RgbImage::new(height, width, data).expect("sizes match"),
        Mask::new(height, width, mask).expect("sizes match"),
    )
}

pub fn blob_frames(count: usize, height: usize, width: usize, seed: u64) -> Vec<(RgbImage, Mask)> {
    let mut rng = Rng::new(seed);
    (0..count).map(|_| blob_frame(height, width, &mut rng)).collect()
}
