//! The deployable model: two learned 3×3 filter banks and a one-hidden-layer MLP.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MIN_CHANNELS;

pub const SEG_CHANNELS: usize = 18;
pub const DEPTH_CHANNELS: usize = 22;
pub const DEFAULT_MLP_HIDDEN: usize = 128;
pub const DEFAULT_FIRE_RATE: f32 = 0.5;
/// Taps per 3×3 filter.
pub const TAPS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Segmentation,
    Depth,
}

impl Task {
    pub fn tag(self) -> u8 {
        match self {
            Task::Segmentation => 0,
            Task::Depth => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Task::Segmentation),
            1 => Some(Task::Depth),
            _ => None,
        }
    }

    pub fn default_channels(self) -> usize {
        match self {
            Task::Segmentation => SEG_CHANNELS,
            Task::Depth => DEPTH_CHANNELS,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Segmentation => "segmentation",
            Task::Depth => "depth",
        })
    }
}

/// Complete NCA model.
///
/// Filter banks are stored channel-major: taps of filter `c` live at
/// `bank[c * 9..c * 9 + 9]`, row by row, and tap `(ky, kx)` multiplies the
/// neighbour at `(y + ky - 1, x + kx - 1)`. The identity bank is implicit.
///
/// `w1` is row-major `3C × H_mlp` and `w2` row-major `H_mlp × C`, so the
/// update for a perception vector `p` is `w2ᵀ · relu(w1ᵀ · p + b1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub task: Task,
    pub channels: usize,
    pub mlp_hidden: usize,
    pub fire_rate: f32,
    pub bank_a: Vec<f32>,
    pub bank_b: Vec<f32>,
    pub w1: Vec<f32>,
    pub b1: Vec<f32>,
    pub w2: Vec<f32>,
}

impl ModelSpec {
    /// All-zero weights with the given dimensions. Such a model never changes a grid.
    pub fn zeros(task: Task, channels: usize, mlp_hidden: usize) -> Self {
        Self {
            task,
            channels,
            mlp_hidden,
            fire_rate: DEFAULT_FIRE_RATE,
            bank_a: vec![0.0; channels * TAPS],
            bank_b: vec![0.0; channels * TAPS],
            w1: vec![0.0; 3 * channels * mlp_hidden],
            b1: vec![0.0; mlp_hidden],
            w2: vec![0.0; mlp_hidden * channels],
        }
    }

    /// Zero model with the default dimensions for `task` (18 or 22 channels, 128 hidden units).
    pub fn default_for(task: Task) -> Self {
        Self::zeros(task, task.default_channels(), DEFAULT_MLP_HIDDEN)
    }

    pub fn perception_len(&self) -> usize {
        3 * self.channels
    }

    pub fn parameter_count(&self) -> usize {
        self.bank_a.len() + self.bank_b.len() + self.w1.len() + self.b1.len() + self.w2.len()
    }

    /// Named weight sections in wire order.
    pub fn sections(&self) -> [(&'static str, &[f32]); 5] {
        [
            ("bank_a", &self.bank_a),
            ("bank_b", &self.bank_b),
            ("mlp_w1", &self.w1),
            ("mlp_b1", &self.b1),
            ("mlp_w2", &self.w2),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.channels;
        let h = self.mlp_hidden;
        if c < MIN_CHANNELS {
            return Err(Error::Config(format!(
                "model needs at least {MIN_CHANNELS} channels, got {c}"
            )));
        }
        if h == 0 {
            return Err(Error::Config("mlp_hidden must be at least 1".into()));
        }
        if !(self.fire_rate > 0.0 && self.fire_rate <= 1.0) {
            return Err(Error::Config(format!(
                "fire_rate must be in (0, 1], got {}",
                self.fire_rate
            )));
        }
        let expected = [c * TAPS, c * TAPS, 3 * c * h, h, h * c];
        for ((name, values), want) in self.sections().iter().zip(expected) {
            if values.len() != want {
                return Err(Error::Config(format!(
                    "{name} has {} values, expected {want}",
                    values.len()
                )));
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name}[{i}] is not finite")));
            }
        }
        Ok(())
    }

    pub fn expect_task(&self, task: Task) -> Result<()> {
        if self.task != task {
            return Err(Error::TaskMismatch {
                expected: task,
                found: self.task,
            });
        }
        Ok(())
    }
}
