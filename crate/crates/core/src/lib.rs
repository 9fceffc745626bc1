//! Deterministic Neural Cellular Automata inference for small devices.
//!
//! The engine runs the classic NCA loop (3×3 depthwise perception, a per-cell
//! MLP, a stochastic residual update) with two image-sized buffers, an
//! optional hidden-activity cut-off, and a scalar or lane-parallel matvec
//! kernel. Models travel as compact `NCAW` weight files.

pub mod bench;
pub mod engine;
pub mod error;
pub mod grid;
pub mod imaging;
pub mod kernel;
pub mod model;
pub mod model_io;
pub mod rng;
pub mod synth;

pub use engine::{mlp_forward, nca_step, perceive, run, stochastic_mask, EarlyStop, StepConfig, StepTrace};
pub use error::{Error, FormatError, Result};
pub use grid::ChannelGrid;
pub use kernel::Kernel;
pub use model::{ModelSpec, Task};
pub use rng::Rng;
