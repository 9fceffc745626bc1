use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use nca_edge::bench::{bench_frames, bench_kernel, list_images};
use nca_edge::engine::{run, EarlyStop, StepConfig, StepTrace};
use nca_edge::imaging::{
    self, dice, extract_depth, extract_segmentation, iou, load_gray, load_image, resize_bilinear,
    save_gray, save_rgb, seed_state, write_atomic, BitDepth, DepthMap, Mask,
};
use nca_edge::model_io::{self, DEFAULT_SIZE_BUDGET};
use nca_edge::rng::{stream, Rng};
use nca_edge::{synth, Error, FormatError, ModelSpec, Result, Task};

use crate::{BenchArgs, CurateArgs, EvalArgs, InferArgs, SynthArgs, TaskArg, ToyModelArgs, ValidateArgs};

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn file_name(path: &Path) -> String {
    path.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn nonempty_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let paths = list_images(dir)?;
    if paths.is_empty() {
        return Err(Error::EmptyInput(format!("no images in {}", dir.display())));
    }
    Ok(paths)
}

struct Targets {
    main: PathBuf,
    soft: Option<PathBuf>,
    rle: Option<PathBuf>,
    trace: Option<PathBuf>,
}

fn trace_jsonl(trace: &StepTrace) -> String {
    let mut out = String::new();
    for e in &trace.entries {
        writeln!(out, "{}", serde_json::to_string(e).unwrap()).unwrap();
    }
    let summary = serde_json::json!({
        "total_steps": trace.total_steps,
        "stopped_early": trace.stopped_early,
    });
    writeln!(out, "{summary}").unwrap();
    out
}

fn infer_one(
    spec: &ModelSpec,
    input: &Path,
    targets: &Targets,
    config: &StepConfig,
    size: Option<usize>,
) -> Result<StepTrace> {
    let mut img = load_image(input)?;
    if let Some(s) = size {
        img = resize_bilinear(&img, s, s)?;
    }
    let mut grid = seed_state(&img, spec, &mut Rng::for_stream(config.seed, stream::NOISE))?;
    let trace = run(&mut grid, spec, config)?;

    match spec.task {
        Task::Segmentation => {
            let seg = extract_segmentation(&grid);
            let mask = seg.binary();
            save_gray(&targets.main, &mask.to_plane(), BitDepth::Eight)?;
            if let Some(p) = &targets.soft {
                save_gray(p, &seg.soft, BitDepth::Eight)?;
            }
            if let Some(p) = &targets.rle {
                write_atomic(p, mask.to_rle().as_bytes())?;
            }
        }
        Task::Depth => {
            let depth = extract_depth(&grid);
            save_gray(&targets.main, &depth.normalized(), BitDepth::Sixteen)?;
        }
    }
    if let Some(p) = &targets.trace {
        write_atomic(p, trace_jsonl(&trace).as_bytes())?;
    }
    Ok(trace)
}

pub fn infer(args: InferArgs, task: Task) -> Result<()> {
    let config = args.schedule.step_config();
    config.validate()?;
    if task == Task::Depth && (args.soft_output.is_some() || args.rle_output.is_some()) {
        return Err(Error::Config("--soft-output and --rle-output apply to segmentation only".into()));
    }
    if args.size == Some(0) {
        return Err(Error::Config("--size must be at least 1".into()));
    }
    let spec = model_io::load(&args.model)?;
    spec.expect_task(task)?;

    if !args.input.is_dir() {
        let targets = Targets {
            main: args.output.clone(),
            soft: args.soft_output.clone(),
            rle: args.rle_output.clone(),
            trace: args.trace.clone(),
        };
        let trace = infer_one(&spec, &args.input, &targets, &config, args.size)?;
        println!(
            "{} -> {} steps={} stopped_early={}",
            args.input.display(),
            args.output.display(),
            trace.total_steps,
            trace.stopped_early
        );
        return Ok(());
    }

    let paths = nonempty_images(&args.input)?;
    for dir in [Some(&args.output), args.soft_output.as_ref(), args.rle_output.as_ref(), args.trace.as_ref()]
        .into_iter()
        .flatten()
    {
        create_dir(dir)?;
    }
    let lines = paths
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let s = stem(path);
            let targets = Targets {
                main: args.output.join(format!("{s}.png")),
                soft: args.soft_output.as_ref().map(|d| d.join(format!("{s}.png"))),
                rle: args.rle_output.as_ref().map(|d| d.join(format!("{s}.rle"))),
                trace: args.trace.as_ref().map(|d| d.join(format!("{s}.jsonl"))),
            };
            let config = StepConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config
            };
            let trace = infer_one(&spec, path, &targets, &config, args.size)?;
            Ok(format!(
                "{} -> {} steps={} stopped_early={}",
                path.display(),
                targets.main.display(),
                trace.total_steps,
                trace.stopped_early
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

pub fn curate(args: CurateArgs) -> Result<()> {
    let paths = nonempty_images(&args.input)?;
    let maps = paths
        .par_iter()
        .map(|p| DepthMap::new(load_gray(p)?))
        .collect::<Result<Vec<_>>>()?;
    let verdict = imaging::curate(&maps, args.curation_threshold)?;

    let accepted_dir = args.output.join("accepted");
    let rejected_dir = args.output.join("rejected");
    create_dir(&accepted_dir)?;
    create_dir(&rejected_dir)?;

    let mut scores = String::from("file\tscore\taccepted\n");
    for (i, path) in paths.iter().enumerate() {
        let accepted = verdict.scores[i] > args.curation_threshold;
        let dest = if accepted { &accepted_dir } else { &rejected_dir }.join(file_name(path));
        let bytes = fs::read(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        write_atomic(&dest, &bytes)?;
        writeln!(scores, "{}\t{:.6}\t{}", file_name(path), verdict.scores[i], accepted).unwrap();
    }
    write_atomic(args.output.join("scores.tsv"), scores.as_bytes())?;
    println!(
        "curate: total={} accepted={} rejected={} threshold={}",
        paths.len(),
        verdict.accepted.len(),
        verdict.rejected.len(),
        args.curation_threshold
    );
    Ok(())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let preds = nonempty_images(&args.input)?;
    let mut table = String::from("image\tdice\tiou\n");
    let mut dices = Vec::new();
    let mut ious = Vec::new();
    for pred_path in &preds {
        let gt_path = args.gt.join(file_name(pred_path));
        let pred = Mask::from_plane(&load_gray(pred_path)?);
        let gt = Mask::from_plane(&load_gray(&gt_path)?);
        let d = dice(&pred, &gt)?;
        let j = iou(&pred, &gt)?;
        writeln!(table, "{}\t{d:.6}\t{j:.6}", file_name(pred_path)).unwrap();
        dices.push(d);
        ious.push(j);
    }
    let (dm, ds) = mean_std(&dices);
    let (im, is) = mean_std(&ious);
    writeln!(table, "mean±std\t{dm:.6}±{ds:.6}\t{im:.6}±{is:.6}").unwrap();
    print!("{table}");
    if let Some(out) = &args.output {
        write_atomic(out, table.as_bytes())?;
    }
    Ok(())
}

pub fn validate_model(args: ValidateArgs) -> Result<()> {
    let spec = model_io::load(&args.model)?;
    let report = model_io::size_report(&spec);
    println!("file: {}", args.model.display());
    println!("task: {}", spec.task);
    println!("channels: {}", spec.channels);
    println!("mlp_hidden: {}", spec.mlp_hidden);
    println!("fire_rate: {}", spec.fire_rate);
    println!("parameters: {}", spec.parameter_count());
    for (name, bytes) in &report.bytes_by_section {
        println!("section {name}: {bytes} B");
    }
    println!("total: {} B (budget {} B)", report.bytes_total, DEFAULT_SIZE_BUDGET);
    if report.bytes_total > DEFAULT_SIZE_BUDGET {
        return Err(FormatError::SizeBudget {
            actual: report.bytes_total,
            allowed: DEFAULT_SIZE_BUDGET,
        }
        .into());
    }
    println!("valid");
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let spec = match &args.model {
        Some(p) => model_io::load(p)?,
        None => synth::toy_model(Task::Segmentation),
    };
    let frames = match &args.input {
        Some(dir) => nonempty_images(dir)?
            .iter()
            .map(|p| Ok((file_name(p), load_image(p)?)))
            .collect::<Result<Vec<_>>>()?,
        None => synth::blob_frames(args.synthetic.unwrap_or(50), args.size, args.size, args.seed)
            .into_iter()
            .enumerate()
            .map(|(i, (img, _))| (format!("synthetic_{i:03}"), img))
            .collect(),
    };
    let base = StepConfig {
        max_steps: args.steps,
        seed: args.seed,
        early_stop: None,
        kernel: args.kernel,
    };
    let early_stop = EarlyStop {
        min_steps: args.min_steps,
        delta_threshold: args.delta_threshold,
        cooldown_init: args.cooldown,
    };
    let mut report = bench_frames(&frames, &spec, &base, early_stop)?;
    if !args.skip_kernel {
        report.kernel = Some(bench_kernel(spec.perception_len(), spec.mlp_hidden, args.kernel_reps.max(1))?);
    }
    print!("{}", report.table());
    if let Some(p) = &args.output {
        write_atomic(p, report.to_jsonl().as_bytes())?;
    }
    if let Some(p) = &args.gnuplot {
        write_atomic(p, report.gnuplot().as_bytes())?;
    }
    Ok(())
}

pub fn toy_model(args: ToyModelArgs) -> Result<()> {
    let task = match args.task {
        TaskArg::Seg => Task::Segmentation,
        TaskArg::Depth => Task::Depth,
    };
    let bytes = model_io::serialize(&synth::toy_model(task))?;
    write_atomic(&args.output, &bytes)?;
    println!("{} ({} B)", args.output.display(), bytes.len());
    Ok(())
}

pub fn synth_frames(args: SynthArgs) -> Result<()> {
    if args.size == 0 {
        return Err(Error::Config("--size must be at least 1".into()));
    }
    create_dir(&args.output)?;
    if let Some(m) = &args.masks {
        create_dir(m)?;
    }
    for (i, (img, mask)) in synth::blob_frames(args.count, args.size, args.size, args.seed)
        .iter()
        .enumerate()
    {
        let name = format!("frame_{i:03}.png");
        save_rgb(args.output.join(&name), img)?;
        if let Some(m) = &args.masks {
            save_gray(m.join(&name), &mask.to_plane(), BitDepth::Eight)?;
        }
    }
    println!("wrote {} frames to {}", args.count, args.output.display());
    Ok(())
}
