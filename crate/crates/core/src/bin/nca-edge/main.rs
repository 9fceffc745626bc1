mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nca_edge::engine::{EarlyStop, StepConfig};
use nca_edge::imaging::DEFAULT_CURATION_THRESHOLD;
use nca_edge::{Error, Kernel};

const EXIT_USAGE: u8 = 2;
const EXIT_FORMAT: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(name = "nca-edge", version, about = "Neural Cellular Automata inference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment an image (or every image in a directory)
    InferSeg(InferArgs),
    /// Estimate depth for an image (or directory); writes 16-bit maps
    InferDepth(InferArgs),
    /// Split pseudo depth maps into accepted/ and rejected/ by flatness score
    Curate(CurateArgs),
    /// Dice and IoU of predicted masks against ground truth
    Eval(EvalArgs),
    /// Check a weight file and print its header and size breakdown
    ValidateModel(ValidateArgs),
    /// Fixed vs. early-stopped step counts over a frame sequence, plus kernel timing
    Bench(BenchArgs),
    /// Write the built-in contracting toy model
    ToyModel(ToyModelArgs),
    /// Write synthetic blob frames and their ground-truth masks
    SynthFrames(SynthArgs),
}

#[derive(Args, Clone)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Stop once hidden-channel activity has settled
    #[arg(long)]
    pub early_stop: bool,
    #[arg(long, default_value_t = 10, requires = "early_stop")]
    pub min_steps: usize,
    #[arg(long, default_value_t = 0.1, requires = "early_stop")]
    pub delta_threshold: f32,
    #[arg(long, default_value_t = 5, requires = "early_stop")]
    pub cooldown: usize,
    #[arg(long, default_value = "vector")]
    pub kernel: Kernel,
}

impl ScheduleArgs {
    fn early_stop_params(&self) -> EarlyStop {
        EarlyStop {
            min_steps: self.min_steps,
            delta_threshold: self.delta_threshold,
            cooldown_init: self.cooldown,
        }
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            max_steps: self.steps,
            seed: self.seed,
            early_stop: self.early_stop.then(|| self.early_stop_params()),
            kernel: self.kernel,
        }
    }
}

#[derive(Args)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Image file, or a directory of images
    #[arg(long)]
    pub input: PathBuf,
    /// Output image file, or a directory when --input is a directory
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Resize inputs to SIZE×SIZE before inference
    #[arg(long)]
    pub size: Option<usize>,
    /// Also write the soft segmentation map (8-bit)
    #[arg(long)]
    pub soft_output: Option<PathBuf>,
    /// Also write the binary mask as run-length text
    #[arg(long)]
    pub rle_output: Option<PathBuf>,
    /// Write the per-step trace as JSON lines
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct CurateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CURATION_THRESHOLD)]
    pub curation_threshold: f64,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Directory of predicted masks
    #[arg(long)]
    pub input: PathBuf,
    /// Directory of ground-truth masks with matching file names
    #[arg(long)]
    pub gt: PathBuf,
    /// Also write the table to this file
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Weight file; defaults to the built-in segmentation toy model
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory of frames, processed in file-name order
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate this many synthetic frames instead of reading --input
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Frame size for synthetic frames
    #[arg(long, default_value_t = 32)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub min_steps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta_threshold: f32,
    #[arg(long, default_value_t = 5)]
    pub cooldown: usize,
    #[arg(long, default_value = "vector")]
    pub kernel: Kernel,
    /// JSON-lines report path
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Gnuplot-friendly column file
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[arg(long, default_value_t = 21)]
    pub kernel_reps: usize,
    #[arg(long)]
    pub skip_kernel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Seg,
    Depth,
}

#[derive(Args)]
pub struct ToyModelArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    /// Directory for ground-truth masks
    #[arg(long)]
    pub masks: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Format(_) => EXIT_FORMAT,
        Error::NumericFault { .. } => EXIT_NUMERIC,
        Error::Io { .. } | Error::Image { .. } => EXIT_IO,
        Error::Config(_) | Error::Contract(_) | Error::TaskMismatch { .. } | Error::EmptyInput(_) => EXIT_USAGE,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("NCA_EDGE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::InferSeg(args) => commands::infer(args, nca_edge::Task::Segmentation),
        Command::InferDepth(args) => commands::infer(args, nca_edge::Task::Depth),
        Command::Curate(args) => commands::curate(args),
        Command::Eval(args) => commands::eval(args),
        Command::ValidateModel(args) => commands::validate_model(args),
        Command::Bench(args) => commands::bench(args),
        Command::ToyModel(args) => commands::toy_model(args),
        Command::SynthFrames(args) => commands::synth_frames(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {}", err.class(), err);
            ExitCode::from(exit_code(&err))
        }
    }
}
