//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Run with `cargo test --test acceptance`.

mod support;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nca_edge::bench::{bench_frames, bench_kernel};
use nca_edge::engine::{run, EarlyStop, StepConfig};
use nca_edge::imaging::{curate, dice, iou, ssim, DepthMap, Mask, Plane};
use nca_edge::kernel::{Kernel, MatRef};
use nca_edge::model_io::{deserialize, serialize_with_budget, size_report, DEFAULT_SIZE_BUDGET, HEADER_BYTES};
use nca_edge::{synth, ModelSpec, Rng, Task};
use support::*;

const ORACLE_CASES: usize = 200;
const ORACLE_TOL: f32 = 1e-6;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(60);
const CLI_CASES: usize = 20;
const BENCH_FRAMES: usize = 50;
const BENCH_SIZE: usize = 24;
const MIN_REDUCTION: f64 = 3.0;
const MAX_OUTPUT_MAD: f64 = 0.05;
const FUZZ_STRINGS: usize = 100_000;
const KERNEL_SHAPES: usize = 1_000;
const KERNEL_REL_TOL: f64 = 1e-5;
const METRIC_CASES: usize = 100;
const METRIC_TOL: f64 = 1e-7;
const CURATION_CASES: usize = 100;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(0xACCE);
    let mut worst = 0.0f32;
    for case in 0..ORACLE_CASES {
        let c = [5, 8, 18][case % 3];
        let h = 1 + (rng.next_u64() % 16) as usize;
        let w = 1 + (rng.next_u64() % 16) as usize;
        let steps = 1 + (rng.next_u64() % 12) as usize;
        let seed = rng.next_u64();
        let grid = random_grid(h, w, c, seed);
        let mut spec = random_spec(Task::Segmentation, c, 8 + (rng.next_u64() % 56) as usize, 0.15, seed ^ 1);
        spec.fire_rate = [0.5, 0.8, 1.0][(case / 3) % 3];
        let kernel = if case % 2 == 0 { Kernel::Vector } else { Kernel::Scalar };
        let mut g = grid.clone();
        let trace = run(&mut g, &spec, &StepConfig { max_steps: steps, seed, early_stop: None, kernel })
            .map_err(|e| e.to_string())?;
        let (expect, deltas) = naive_run(&grid, &spec, steps, seed);
        worst = worst.max(max_abs_diff(g.data(), &expect));
        for (e, d) in trace.entries.iter().zip(&deltas) {
            worst = worst.max((e.hidden_delta - d).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= ORACLE_TOL && elapsed < ORACLE_TIME_LIMIT,
        format!("{ORACLE_CASES} cases, max abs deviation {worst:.3e} (tol {ORACLE_TOL:e}), {:.1}s", elapsed.as_secs_f64()),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nca-edge"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    cli(&["toy-model", "--task", "seg", "--output", &p("seg.ncaw")])?;
    cli(&["toy-model", "--task", "depth", "--output", &p("depth.ncaw")])?;
    cli(&["synth-frames", "--count", "4", "--size", "16", "--seed", "21", "--output", &p("frames")])?;

    let frames = p("frames");
    let mut identical = 0;
    for case in 0..CLI_CASES {
        let (cmd, model) = if case % 4 == 3 { ("infer-depth", p("depth.ncaw")) } else { ("infer-seg", p("seg.ncaw")) };
        let seed = (case * 7919).to_string();
        let steps = (5 + case * 3).to_string();
        let kernel = if case % 2 == 0 { "vector" } else { "scalar" };
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = p(&format!("c{case}_{rep}"));
            let mut args = vec![
                cmd, "--model", &model, "--input", &frames, "--output", &out,
                "--seed", &seed, "--steps", &steps, "--kernel", kernel,
            ];
            let trace = format!("{out}_trace");
            if case % 3 == 0 {
                args.push("--early-stop");
            }
            args.extend(["--trace", &trace]);
            cli(&args)?;
            let mut files = read_all(Path::new(&out));
            files.extend(read_all(Path::new(&trace)));
            outputs.push(files);
        }
        if outputs[0] == outputs[1] && !outputs[0].is_empty() {
            identical += 1;
        }
    }
    check(identical == CLI_CASES, format!("{identical}/{CLI_CASES} cases byte-identical across repeated runs"))
}

fn early_stop_counter() -> Outcome {
    let es = EarlyStop::default();
    let zeros = es.stop_step(std::iter::repeat_n(0.0, 1_000));
    let oscillating = es.stop_step((0..100_000).map(|i| if i % 2 == 0 { 0.05 } else { 0.5 }));

    // same counter driven through the engine with a model that never changes the state
    let mut quiet = synth::toy_model(Task::Segmentation);
    quiet.w2.iter_mut().for_each(|v| *v = 0.0);
    let mut grid = random_grid(8, 8, quiet.channels, 3);
    let trace = run(&mut grid, &quiet, &StepConfig { early_stop: Some(es), ..Default::default() })
        .map_err(|e| e.to_string())?;

    check(
        zeros == Some(15) && oscillating.is_none() && trace.total_steps == 15 && trace.stopped_early,
        format!(
            "all-zero deltas stop at {zeros:?} (engine {}), oscillating 0.05/0.5 stop {oscillating:?}",
            trace.total_steps
        ),
    )
}

fn early_stop_effectiveness() -> Outcome {
    let spec = synth::toy_model(Task::Segmentation);
    let frames: Vec<_> = synth::blob_frames(BENCH_FRAMES, BENCH_SIZE, BENCH_SIZE, 50)
        .into_iter()
        .enumerate()
        .map(|(i, (img, _))| (format!("f{i}"), img))
        .collect();
    let report = bench_frames(&frames, &spec, &StepConfig::default(), EarlyStop::default()).map_err(|e| e.to_string())?;
    check(
        report.reduction_factor >= MIN_REDUCTION && report.mean_output_mad <= MAX_OUTPUT_MAD,
        format!(
            "{} frames, steps {} -> {} (x{:.2}, need >= {MIN_REDUCTION}), mean output deviation {:.4} (max {MAX_OUTPUT_MAD})",
            report.frames.len(),
            report.total_steps_fixed,
            report.total_steps_regularized,
            report.reduction_factor,
            report.mean_output_mad
        ),
    )
}

/// Re-seals a mutated file so only the semantic check can reject it.
fn reseal(mut bytes: Vec<u8>) -> Vec<u8> {
    let n = bytes.len() - 4;
    let crc = crc32fast::hash(&bytes[..n]);
    bytes[n..].copy_from_slice(&crc.to_le_bytes());
    bytes
}

fn size_budget_and_validation() -> Outcome {
    let default_bytes = size_report(&ModelSpec::default_for(Task::Segmentation)).bytes_total;
    let golden = include_bytes!("data/golden_seg.ncaw").to_vec();
    let golden_ok = deserialize(&golden).is_ok()
        && cli(&["validate-model", "--model", concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden_seg.ncaw")]).is_ok();

    let n = golden.len();
    let with = |at: usize, v: &[u8]| {
        let mut b = golden.clone();
        b[at..at + v.len()].copy_from_slice(v);
        b
    };
    let corruptions: Vec<(&str, Vec<u8>)> = vec![
        ("bad magic", with(0, b"NCAX")),
        ("future version", with(4, &2u16.to_le_bytes())),
        ("unknown task", with(6, &[7])),
        ("zero channels", reseal(with(7, &0u16.to_le_bytes()))),
        ("fire rate 0", reseal(with(11, &0f32.to_le_bytes()))),
        ("payload bit flip", with(HEADER_BYTES + 1000, &[golden[HEADER_BYTES + 1000] ^ 0x10])),
        ("crc flip", with(n - 1, &[golden[n - 1] ^ 0x80])),
        ("truncated", golden[..n - 9].to_vec()),
        ("trailing byte", [golden.clone(), vec![0]].concat()),
        ("NaN weight", reseal(with(HEADER_BYTES + 40, &f32::NAN.to_le_bytes()))),
    ];
    let rejected = corruptions.iter().filter(|(_, b)| deserialize(b).is_err()).count();

    let mut rng = Rng::new(0xF022);
    let mut panics = 0;
    for i in 0..FUZZ_STRINGS {
        let len = (rng.next_u64() % 128) as usize;
        let mut bytes: Vec<u8> = (0..len).map(|_| rng.next_u64() as u8).collect();
        if i % 2 == 0 && len >= 4 {
            bytes[..4].copy_from_slice(b"NCAW");
        }
        if catch_unwind(AssertUnwindSafe(|| deserialize(&bytes))).is_err() {
            panics += 1;
        }
    }

    // a spec past the budget serializes only with the budget lifted
    let big = ModelSpec::zeros(Task::Segmentation, 32, 256);
    let over_refused = serialize_with_budget(&big, DEFAULT_SIZE_BUDGET).is_err();

    check(
        default_bytes <= DEFAULT_SIZE_BUDGET && golden_ok && rejected == corruptions.len() && panics == 0 && over_refused,
        format!(
            "default seg file {default_bytes} B (budget {DEFAULT_SIZE_BUDGET}), golden valid {golden_ok}, \
             {rejected}/{} corruptions rejected, {panics} panics over {FUZZ_STRINGS} random strings",
            corruptions.len()
        ),
    )
}

fn kernel_agreement() -> Outcome {
    let mut rng = Rng::new(0x4E4E);
    let mut worst = 0.0f64;
    for _ in 0..KERNEL_SHAPES {
        let rows = 1 + (rng.next_u64() % 160) as usize;
        let cols = 1 + (rng.next_u64() % 160) as usize;
        let data: Vec<f32> = (0..rows * cols).map(|_| rng.next_f32() * 2.0 - 1.0).collect();
        let x: Vec<f32> = (0..rows).map(|_| rng.next_f32() * 2.0 - 1.0).collect();
        let a = MatRef::new(rows, cols, &data).map_err(|e| e.to_string())?;
        let s = Kernel::Scalar.matvec(a, &x).map_err(|e| e.to_string())?;
        let v = Kernel::Vector.matvec(a, &x).map_err(|e| e.to_string())?;
        for (s, v) in s.iter().zip(&v) {
            worst = worst.max(((s - v).abs() / s.abs().max(1.0)) as f64);
        }
    }
    let spec = ModelSpec::default_for(Task::Segmentation);
    let bench = bench_kernel(spec.perception_len(), spec.mlp_hidden, 21).map_err(|e| e.to_string())?;
    check(
        worst <= KERNEL_REL_TOL && bench.speedup >= 1.0,
        format!(
            "{KERNEL_SHAPES} shapes, max relative error {worst:.2e} (tol {KERNEL_REL_TOL:e}), \
             vector speedup x{:.2} on {}x{}",
            bench.speedup, bench.rows, bench.cols
        ),
    )
}

fn metric_oracles() -> Outcome {
    let mut rng = Rng::new(0x3E7);
    let mut worst = 0.0f64;
    let mut ordered = true;
    for _ in 0..METRIC_CASES {
        let h = 1 + (rng.next_u64() % 12) as usize;
        let w = 1 + (rng.next_u64() % 12) as usize;
        let density = rng.next_f32();
        let a: Vec<bool> = (0..h * w).map(|_| rng.next_f32() < density).collect();
        let b: Vec<bool> = (0..h * w).map(|_| rng.next_f32() < density).collect();
        let (ma, mb) = (Mask::new(h, w, a.clone()).unwrap(), Mask::new(h, w, b.clone()).unwrap());
        let (d, j) = (dice(&ma, &mb).unwrap(), iou(&ma, &mb).unwrap());
        let (bd, bj) = overlap_brute(&a, &b);
        ordered &= d >= j;

        let pa = Plane::new(h, w, (0..h * w).map(|_| rng.next_f32()).collect()).unwrap();
        let pb = Plane::new(h, w, (0..h * w).map(|_| rng.next_f32()).collect()).unwrap();
        let s = ssim(&pa, &pb).unwrap();
        worst = worst.max((d - bd).abs()).max((j - bj).abs()).max((s - ssim_brute(&pa, &pb)).abs());
    }
    check(
        worst <= METRIC_TOL && ordered,
        format!("{METRIC_CASES} inputs, max deviation {worst:.2e} (tol {METRIC_TOL:e}), dice >= iou {ordered}"),
    )
}

fn curation() -> Outcome {
    let mut rng = Rng::new(0xC0DE);
    let thresholds = [0.0, 0.5, 1.1, 5.0, 20.0, 60.0, 150.0];
    let mut partition_ok = true;
    let mut monotone = true;
    let mut constants_rejected = true;
    for _ in 0..CURATION_CASES {
        let count = 1 + (rng.next_u64() % 12) as usize;
        let mut constant = Vec::new();
        let maps: Vec<DepthMap> = (0..count)
            .map(|i| {
                let (h, w) = (1 + (rng.next_u64() % 10) as usize, 1 + (rng.next_u64() % 10) as usize);
                let flat = rng.next_f32() < 0.25;
                if flat {
                    constant.push(i);
                }
                let level = rng.next_f32() * 10.0;
                let amp = rng.next_f32();
                let data = (0..h * w).map(|_| if flat { level } else { level + amp * rng.next_f32() }).collect();
                DepthMap::new(Plane::new(h, w, data).unwrap()).unwrap()
            })
            .collect();
        let mut previous: Option<Vec<usize>> = None;
        for &t in &thresholds {
            let c = curate(&maps, t).map_err(|e| e.to_string())?;
            let mut all: Vec<usize> = c.accepted.iter().chain(&c.rejected).copied().collect();
            all.sort();
            partition_ok &= all == (0..count).collect::<Vec<_>>();
            partition_ok &= c.accepted.iter().all(|&i| c.scores[i] > t);
            constants_rejected &= constant.iter().all(|i| c.rejected.contains(i));
            if let Some(prev) = &previous {
                monotone &= c.accepted.iter().all(|i| prev.contains(i));
            }
            previous = Some(c.accepted);
        }
    }
    check(
        partition_ok && monotone && constants_rejected,
        format!(
            "{CURATION_CASES} map sets x {} thresholds, partition {partition_ok}, monotone {monotone}, \
             constant maps rejected {constants_rejected}",
            thresholds.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("cli determinism", cli_determinism),
        ("early-stop counter", early_stop_counter),
        ("early-stop effectiveness", early_stop_effectiveness),
        ("size budget and validation", size_budget_and_validation),
        ("kernel agreement", kernel_agreement),
        ("metric oracles", metric_oracles),
        ("curation", curation),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
