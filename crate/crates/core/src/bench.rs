//! Step-count and kernel benchmarks.
//!
//! `bench_frames` runs every frame twice from the same seeded state, once for
//! the full fixed schedule and once with the hidden-activity cut-off, and
//! compares the step counts and output channels. Timing covers only the step
//! loop.

use std::fmt::Write as _;
use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run, EarlyStop, StepConfig};
use crate::error::{Error, Result};
use crate::imaging::{load_image, seed_state, RgbImage};
use crate::kernel::{Kernel, MatRef};
use crate::model::ModelSpec;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Serialize)]
pub struct FrameResult {
    pub frame: String,
    pub steps_fixed: usize,
    pub steps_regularized: usize,
    pub stopped_early: bool,
    #[serde(serialize_with = "as_millis")]
    pub time_fixed: Duration,
    #[serde(serialize_with = "as_millis")]
    pub time_regularized: Duration,
    /// Mean absolute difference of the raw output channel between schedules.
    pub output_mad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelBench {
    pub rows: usize,
    pub cols: usize,
    pub repetitions: usize,
    #[serde(serialize_with = "as_millis")]
    pub scalar: Duration,
    #[serde(serialize_with = "as_millis")]
    pub vector: Duration,
    pub speedup: f64,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub frames: Vec<FrameResult>,
    pub total_steps_fixed: usize,
    pub total_steps_regularized: usize,
    pub reduction_factor: f64,
    pub mean_step_ms: f64,
    pub mean_output_mad: f64,
    pub kernel: Option<KernelBench>,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

/// Runs both schedules on each frame. Frame `i` uses seed `base.seed + i` for
/// its noise and fire streams in both runs, so the two runs are identical up
/// to the cut-off.
pub fn bench_frames(
    frames: &[(String, RgbImage)],
    spec: &ModelSpec,
    base: &StepConfig,
    early_stop: EarlyStop,
) -> Result<BenchReport> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("no frames to benchmark".into()));
    }
    spec.validate()?;
    base.validate()?;
    early_stop.validate()?;

    let results: Vec<FrameResult> = frames
        .par_iter()
        .enumerate()
        .map(|(i, (name, img))| {
            let seed = base.seed.wrapping_add(i as u64);
            let mut fixed = seed_state(img, spec, &mut Rng::for_stream(seed, rng::stream::NOISE))?;
            let mut regular = fixed.clone();
            let fixed_cfg = StepConfig { seed, early_stop: None, ..*base };
            let regular_cfg = StepConfig { seed, early_stop: Some(early_stop), ..*base };
            let tf = run(&mut fixed, spec, &fixed_cfg)?;
            let tr = run(&mut regular, spec, &regular_cfg)?;
            let (a, b) = (fixed.output_plane(), regular.output_plane());
            let mad = a.iter().zip(&b).map(|(x, y)| (x - y).abs() as f64).sum::<f64>() / a.len() as f64;
            Ok(FrameResult {
                frame: name.clone(),
                steps_fixed: tf.total_steps,
                steps_regularized: tr.total_steps,
                stopped_early: tr.stopped_early,
                time_fixed: tf.elapsed,
                time_regularized: tr.elapsed,
                output_mad: mad,
            })
        })
        .collect::<Result<_>>()?;

    let total_fixed: usize = results.iter().map(|r| r.steps_fixed).sum();
    let total_reg: usize = results.iter().map(|r| r.steps_regularized).sum();
    let total_time: f64 = results
        .iter()
        .map(|r| (r.time_fixed + r.time_regularized).as_secs_f64())
        .sum();
    let mean_mad = results.iter().map(|r| r.output_mad).sum::<f64>() / results.len() as f64;
    Ok(BenchReport {
        total_steps_fixed: total_fixed,
        total_steps_regularized: total_reg,
        reduction_factor: total_fixed as f64 / total_reg as f64,
        mean_step_ms: total_time * 1e3 / (total_fixed + total_reg) as f64,
        mean_output_mad: mean_mad,
        frames: results,
        kernel: None,
    })
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

/// Image files in `dir`, sorted lexicographically by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// [`bench_frames`] over every image in a directory, in file-name order.
pub fn bench_sequence(
    dir: &Path,
    spec: &ModelSpec,
    base: &StepConfig,
    early_stop: EarlyStop,
) -> Result<BenchReport> {
    let paths = list_images(dir)?;
    if paths.is_empty() {
        return Err(Error::EmptyInput(format!("no images in {}", dir.display())));
    }
    let frames = paths
        .iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            Ok((name, load_image(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    bench_frames(&frames, spec, base, early_stop)
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Times both matvec paths on a random `rows × cols` matrix.
///
/// Results are cross-checked first; a disagreement above `1e-5` relative is
/// a contract error.
pub fn bench_kernel(rows: usize, cols: usize, repetitions: usize) -> Result<KernelBench> {
    if rows == 0 || cols == 0 || repetitions == 0 {
        return Err(Error::Config("kernel bench needs non-zero dims and repetitions".into()));
    }
    let mut rng = Rng::new(0x5eed);
    let data: Vec<f32> = (0..rows * cols).map(|_| rng.next_f32() * 2.0 - 1.0).collect();
    let x: Vec<f32> = (0..rows).map(|_| rng.next_f32() * 2.0 - 1.0).collect();
    let a = MatRef::new(rows, cols, &data)?;

    let s = Kernel::Scalar.matvec(a, &x)?;
    let v = Kernel::Vector.matvec(a, &x)?;
    let max_rel_err = s
        .iter()
        .zip(&v)
        .map(|(s, v)| ((s - v).abs() / s.abs().max(1.0)) as f64)
        .fold(0.0, f64::max);
    if max_rel_err > 1e-5 {
        return Err(Error::Contract(format!(
            "kernel paths disagree: max relative error {max_rel_err:e}"
        )));
    }

    // enough inner calls that one sample is well above timer resolution
    let inner = (2_000_000 / (rows * cols)).max(1);
    let mut out = vec![0.0; cols];
    let mut time = |k: Kernel| -> Result<Duration> {
        let mut samples = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let t = Instant::now();
            for _ in 0..inner {
                k.matvec_into(black_box(a), black_box(&x), &mut out)?;
                black_box(&out);
            }
            samples.push(t.elapsed());
        }
        Ok(median(samples))
    };
    let scalar = time(Kernel::Scalar)?;
    let vector = time(Kernel::Vector)?;
    Ok(KernelBench {
        rows,
        cols,
        repetitions,
        scalar,
        vector,
        speedup: scalar.as_secs_f64() / vector.as_secs_f64().max(1e-12),
        max_rel_err,
    })
}

impl BenchReport {
    /// One JSON object per frame followed by a summary object.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for f in &self.frames {
            let mut v = serde_json::to_value(f).unwrap();
            v["kind"] = "frame".into();
            writeln!(out, "{v}").unwrap();
        }
        let summary = serde_json::json!({
            "kind": "summary",
            "frames": self.frames.len(),
            "total_steps_fixed": self.total_steps_fixed,
            "total_steps_regularized": self.total_steps_regularized,
            "reduction_factor": self.reduction_factor,
            "mean_step_ms": self.mean_step_ms,
            "mean_output_mad": self.mean_output_mad,
            "kernel": self.kernel,
        });
        writeln!(out, "{summary}").unwrap();
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<24} {:>7} {:>7} {:>6} {:>10} {:>10} {:>10}",
            "frame", "fixed", "reg", "early", "fixed_ms", "reg_ms", "out_mad"
        )
        .unwrap();
        for f in &self.frames {
            writeln!(
                out,
                "{:<24} {:>7} {:>7} {:>6} {:>10.2} {:>10.2} {:>10.5}",
                f.frame,
                f.steps_fixed,
                f.steps_regularized,
                if f.stopped_early { "yes" } else { "no" },
                f.time_fixed.as_secs_f64() * 1e3,
                f.time_regularized.as_secs_f64() * 1e3,
                f.output_mad
            )
            .unwrap();
        }
        writeln!(
            out,
            "total steps: fixed {} / regularized {} (reduction x{:.2}), mean {:.3} ms/step, mean output deviation {:.5}",
            self.total_steps_fixed,
            self.total_steps_regularized,
            self.reduction_factor,
            self.mean_step_ms,
            self.mean_output_mad
        )
        .unwrap();
        if let Some(k) = &self.kernel {
            writeln!(
                out,
                "kernel {}x{}: scalar {:.3} ms, vector {:.3} ms, speedup x{:.2}",
                k.rows,
                k.cols,
                k.scalar.as_secs_f64() * 1e3,
                k.vector.as_secs_f64() * 1e3,
                k.speedup
            )
            .unwrap();
        }
        out
    }

    /// Whitespace-separated columns for plotting tools.
    pub fn gnuplot(&self) -> String {
        let mut out = String::from("# index steps_fixed steps_regularized time_fixed_ms time_regularized_ms output_mad\n");
        for (i, f) in self.frames.iter().enumerate() {
            writeln!(
                out,
                "{i} {} {} {:.4} {:.4} {:.6}",
                f.steps_fixed,
                f.steps_regularized,
                f.time_fixed.as_secs_f64() * 1e3,
                f.time_regularized.as_secs_f64() * 1e3,
                f.output_mad
            )
            .unwrap();
        }
        out
    }
}
