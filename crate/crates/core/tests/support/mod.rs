//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the engine's compute paths; only plain data types
//! and the generator are shared.
#![allow(dead_code)]

use nca_edge::imaging::Plane;
use nca_edge::{ChannelGrid, ModelSpec, Rng, Task};

pub fn random_spec(task: Task, channels: usize, hidden: usize, scale: f32, seed: u64) -> ModelSpec {
    let mut rng = Rng::new(seed);
    let mut spec = ModelSpec::zeros(task, channels, hidden);
    let mut draw = |v: &mut f32| *v = (rng.next_f32() - 0.5) * 2.0 * scale;
    spec.bank_a.iter_mut().for_each(&mut draw);
    spec.bank_b.iter_mut().for_each(&mut draw);
    spec.w1.iter_mut().for_each(&mut draw);
    spec.b1.iter_mut().for_each(&mut draw);
    spec.w2.iter_mut().for_each(&mut draw);
    spec
}

pub fn random_grid(h: usize, w: usize, c: usize, seed: u64) -> ChannelGrid {
    let mut rng = Rng::new(seed);
    let data = (0..h * w * c).map(|_| rng.next_f32()).collect();
    ChannelGrid::from_vec(h, w, c, data).unwrap()
}

fn clamp_idx(v: isize, len: usize) -> usize {
    v.clamp(0, len as isize - 1) as usize
}

/// Direct 3×3 depthwise cross-correlation of every channel, replicate padding.
/// Returns a fresh `H × W × C` buffer.
pub fn conv_bank(data: &[f32], h: usize, w: usize, c: usize, bank: &[f32]) -> Vec<f32> {
    let mut out = vec![0.0f32; h * w * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0f32;
                for ky in 0..3 {
                    for kx in 0..3 {
                        let yy = clamp_idx(y as isize + ky as isize - 1, h);
                        let xx = clamp_idx(x as isize + kx as isize - 1, w);
                        acc += bank[ch * 9 + ky * 3 + kx] * data[(yy * w + xx) * c + ch];
                    }
                }
                out[(y * w + x) * c + ch] = acc;
            }
        }
    }
    out
}

/// `w2ᵀ · relu(w1ᵀ · p + b1)` by explicit dot products.
pub fn mlp(spec: &ModelSpec, p: &[f32]) -> Vec<f32> {
    let (c, hid) = (spec.channels, spec.mlp_hidden);
    let hidden: Vec<f32> = (0..hid)
        .map(|j| {
            let mut acc = 0.0f32;
            for (i, &pi) in p.iter().enumerate() {
                acc += pi * spec.w1[i * hid + j];
            }
            (acc + spec.b1[j]).max(0.0)
        })
        .collect();
    (0..c)
        .map(|k| {
            let mut acc = 0.0f32;
            for (j, &hj) in hidden.iter().enumerate() {
                acc += hj * spec.w2[j * c + k];
            }
            acc
        })
        .collect()
}

/// Naive step: draw the whole mask, convolve every bank into its own buffer,
/// collect updates, then apply them after the sweep.
#[allow(clippy::needless_range_loop)]
pub fn naive_step(grid: &ChannelGrid, spec: &ModelSpec, rng: &mut Rng) -> (Vec<f32>, f32) {
    let (h, w, c) = (grid.height(), grid.width(), grid.channels());
    let data = grid.data();
    let mask: Vec<bool> = (0..h * w).map(|_| rng.next_f32() < spec.fire_rate).collect();
    let conv_a = conv_bank(data, h, w, c, &spec.bank_a);
    let conv_b = conv_bank(data, h, w, c, &spec.bank_b);

    let mut updates: Vec<Option<Vec<f32>>> = vec![None; h * w];
    for cell in 0..h * w {
        if !mask[cell] {
            continue;
        }
        let mut p = Vec::with_capacity(3 * c);
        p.extend_from_slice(&data[cell * c..(cell + 1) * c]);
        p.extend_from_slice(&conv_a[cell * c..(cell + 1) * c]);
        p.extend_from_slice(&conv_b[cell * c..(cell + 1) * c]);
        updates[cell] = Some(mlp(spec, &p));
    }

    let mut next = data.to_vec();
    let mut delta = 0.0f64;
    for (cell, u) in updates.iter().enumerate() {
        if let Some(u) = u {
            for ch in 3..c {
                let i = cell * c + ch;
                let old = next[i];
                next[i] = old + u[ch];
                if ch < c - 1 {
                    delta += (next[i] - old).abs() as f64;
                }
            }
        }
    }
    (next, (delta / (h * w * (c - 4)) as f64) as f32)
}

/// Runs `steps` naive steps with the same fire stream the engine uses.
pub fn naive_run(grid: &ChannelGrid, spec: &ModelSpec, steps: usize, seed: u64) -> (Vec<f32>, Vec<f32>) {
    let mut rng = Rng::for_stream(seed, nca_edge::rng::stream::FIRE);
    let mut g = grid.clone();
    let mut deltas = Vec::new();
    for _ in 0..steps {
        let (next, d) = naive_step(&g, spec, &mut rng);
        g = ChannelGrid::from_vec(g.height(), g.width(), g.channels(), next).unwrap();
        deltas.push(d);
    }
    (g.into_vec(), deltas)
}

pub fn max_abs_diff(a: &[f32], b: &[f32]) -> f32 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
}

/// SSIM by explicit per-window loops, two-pass statistics.
pub fn ssim_brute(a: &Plane, b: &Plane) -> f64 {
    let (h, w) = (a.height, a.width);
    let (wy, wx) = (7.min(h), 7.min(w));
    let n = (wy * wx) as f64;
    let c1 = 0.01f64.powi(2);
    let c2 = 0.03f64.powi(2);
    let mut total = 0.0;
    let mut count = 0;
    for y0 in 0..=h - wy {
        for x0 in 0..=w - wx {
            let pix = |p: &Plane| -> Vec<f64> {
                let mut v = Vec::new();
                for y in y0..y0 + wy {
                    for x in x0..x0 + wx {
                        v.push(p.at(y, x) as f64);
                    }
                }
                v
            };
            let (pa, pb) = (pix(a), pix(b));
            let ma = pa.iter().sum::<f64>() / n;
            let mb = pb.iter().sum::<f64>() / n;
            let va = pa.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / n;
            let vb = pb.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / n;
            let cov = pa.iter().zip(&pb).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    total / count as f64
}

/// Dice and IoU by counting set elements.
pub fn overlap_brute(a: &[bool], b: &[bool]) -> (f64, f64) {
    let mut inter = 0;
    let mut union = 0;
    let mut na = 0;
    let mut nb = 0;
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
        na += x as usize;
        nb += y as usize;
    }
    if union == 0 {
        return (1.0, 1.0);
    }
    (2.0 * inter as f64 / (na + nb) as f64, inter as f64 / union as f64)
}

/// Gradient score straight from the definition, without reusing the normalizer.
pub fn gradient_score_brute(raw: &Plane) -> f64 {
    let lo = raw.data.iter().cloned().fold(f32::INFINITY, f32::min) as f64;
    let hi = raw.data.iter().cloned().fold(f32::NEG_INFINITY, f32::max) as f64;
    let (h, w) = (raw.height as isize, raw.width as isize);
    let v = |y: isize, x: isize| -> f64 {
        let (y, x) = (y.clamp(0, h - 1) as usize, x.clamp(0, w - 1) as usize);
        if hi > lo {
            255.0 * ((raw.at(y, x) as f64 - lo) / (hi - lo))
        } else {
            0.0
        }
    };
    let mut s = 0.0;
    for y in 0..h {
        for x in 0..w {
            let gx = 0.5 * (v(y, x + 1) - v(y, x - 1));
            let gy = 0.5 * (v(y + 1, x) - v(y - 1, x));
            s += gx.hypot(gy);
        }
    }
    s / (h * w) as f64
}
