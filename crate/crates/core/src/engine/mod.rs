//! NCA inference: perception, per-cell MLP, stochastic update and the step loop.
//!
//! A step keeps exactly two `H × W × C` buffers alive: the state grid, which is
//! only read while updates are computed, and an update buffer that collects
//! the MLP output of every fired cell. The update buffer is added into the
//! non-RGB channels once the whole sweep is done, so every cell sees the same
//! pre-step neighbourhood.

mod early_stop;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use early_stop::{EarlyStop, EarlyStopState};

use crate::error::{Error, Result};
use crate::grid::{ChannelGrid, RGB_CHANNELS};
use crate::kernel::Kernel;
use crate::model::{ModelSpec, TAPS};
use crate::rng::{self, Rng};

/// Inference schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub max_steps: usize,
    pub seed: u64,
    pub early_stop: Option<EarlyStop>,
    pub kernel: Kernel,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            max_steps: 100,
            seed: 0,
            early_stop: None,
            kernel: Kernel::Vector,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if let Some(es) = &self.early_stop {
            es.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    /// 1-based step number.
    pub step: usize,
    pub hidden_delta: f32,
    pub fired_cells: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub entries: Vec<StepEntry>,
    pub total_steps: usize,
    pub stopped_early: bool,
    /// Wall time of the step loop. Not serialized, so traces stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl StepTrace {
    pub fn hidden_deltas(&self) -> impl Iterator<Item = f32> + '_ {
        self.entries.iter().map(|e| e.hidden_delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub hidden_delta: f32,
    pub fired_cells: usize,
}

fn check_channels(grid: &ChannelGrid, spec: &ModelSpec) -> Result<()> {
    if grid.channels() != spec.channels {
        return Err(Error::Config(format!(
            "grid has {} channels but model expects {}",
            grid.channels(),
            spec.channels
        )));
    }
    Ok(())
}

/// Reorders a channel-major bank into tap-major order (`[tap * C + c]`).
fn taps_major(bank: &[f32], channels: usize) -> Vec<f32> {
    let mut out = vec![0.0; bank.len()];
    for c in 0..channels {
        for t in 0..TAPS {
            out[t * channels + c] = bank[c * TAPS + t];
        }
    }
    out
}

#[inline]
fn neighbour_offsets(pos: usize, len: usize) -> [usize; 3] {
    [pos.saturating_sub(1), pos, (pos + 1).min(len - 1)]
}

/// Writes `[cell, bank A response, bank B response]` for cell `(x, y)` into `out`.
/// Borders replicate the edge cells.
fn perceive_into(
    grid: &ChannelGrid,
    taps_a: &[f32],
    taps_b: &[f32],
    x: usize,
    y: usize,
    out: &mut [f32],
) {
    let c = grid.channels();
    let (identity, rest) = out.split_at_mut(c);
    let (resp_a, resp_b) = rest.split_at_mut(c);
    identity.copy_from_slice(grid.cell(y, x));
    resp_a.fill(0.0);
    resp_b.fill(0.0);

    let rows = neighbour_offsets(y, grid.height());
    let cols = neighbour_offsets(x, grid.width());
    for (ky, &yy) in rows.iter().enumerate() {
        for (kx, &xx) in cols.iter().enumerate() {
            let tap = ky * 3 + kx;
            let cell = grid.cell(yy, xx);
            let fa = &taps_a[tap * c..(tap + 1) * c];
            let fb = &taps_b[tap * c..(tap + 1) * c];
            for ch in 0..c {
                resp_a[ch] += fa[ch] * cell[ch];
                resp_b[ch] += fb[ch] * cell[ch];
            }
        }
    }
}

/// Perception vector of length `3C` for one cell.
pub fn perceive(grid: &ChannelGrid, spec: &ModelSpec, x: usize, y: usize) -> Result<Vec<f32>> {
    check_channels(grid, spec)?;
    if x >= grid.width() || y >= grid.height() {
        return Err(Error::Contract(format!(
            "cell ({x}, {y}) outside {}x{} grid",
            grid.width(),
            grid.height()
        )));
    }
    let c = spec.channels;
    let mut out = vec![0.0; 3 * c];
    perceive_into(
        grid,
        &taps_major(&spec.bank_a, c),
        &taps_major(&spec.bank_b, c),
        x,
        y,
        &mut out,
    );
    Ok(out)
}

#[inline]
fn mlp_into(spec: &ModelSpec, kernel: Kernel, perception: &[f32], hidden: &mut [f32], out: &mut [f32]) {
    kernel.apply(&spec.w1, spec.mlp_hidden, perception, hidden);
    for (h, b) in hidden.iter_mut().zip(&spec.b1) {
        *h = (*h + b).max(0.0);
    }
    kernel.apply(&spec.w2, spec.channels, hidden, out);
}

/// `w2ᵀ · relu(w1ᵀ · perception + b1)` using the given kernel path.
pub fn mlp_forward_with(kernel: Kernel, perception: &[f32], spec: &ModelSpec) -> Result<Vec<f32>> {
    if perception.len() != spec.perception_len() {
        return Err(Error::Config(format!(
            "perception has {} entries, model expects {}",
            perception.len(),
            spec.perception_len()
        )));
    }
    spec.validate()?;
    let mut hidden = vec![0.0; spec.mlp_hidden];
    let mut out = vec![0.0; spec.channels];
    mlp_into(spec, kernel, perception, &mut hidden, &mut out);
    Ok(out)
}

pub fn mlp_forward(perception: &[f32], spec: &ModelSpec) -> Result<Vec<f32>> {
    mlp_forward_with(Kernel::default(), perception, spec)
}

/// One fire decision per cell, drawn in row-major order.
///
/// `nca_step` consumes the generator identically, so the mask returned here
/// for a given generator state is the set of cells the next step updates.
pub fn stochastic_mask(rng: &mut Rng, cell_count: usize, fire_rate: f32) -> Result<Vec<bool>> {
    if !(fire_rate > 0.0 && fire_rate <= 1.0) {
        return Err(Error::Config(format!("fire_rate must be in (0, 1], got {fire_rate}")));
    }
    Ok((0..cell_count).map(|_| rng.next_f32() < fire_rate).collect())
}

/// Reusable per-run state: the update buffer plus small scratch vectors.
#[derive(Debug)]
pub struct Stepper<'m> {
    spec: &'m ModelSpec,
    kernel: Kernel,
    height: usize,
    width: usize,
    taps_a: Vec<f32>,
    taps_b: Vec<f32>,
    perception: Vec<f32>,
    hidden: Vec<f32>,
    update: Vec<f32>,
    steps_taken: usize,
}

impl<'m> Stepper<'m> {
    pub fn new(spec: &'m ModelSpec, grid: &ChannelGrid, kernel: Kernel) -> Result<Self> {
        spec.validate()?;
        check_channels(grid, spec)?;
        let c = spec.channels;
        Ok(Self {
            spec,
            kernel,
            height: grid.height(),
            width: grid.width(),
            taps_a: taps_major(&spec.bank_a, c),
            taps_b: taps_major(&spec.bank_b, c),
            perception: vec![0.0; 3 * c],
            hidden: vec![0.0; spec.mlp_hidden],
            update: vec![0.0; grid.data().len()],
            steps_taken: 0,
        })
    }

    /// Advances `grid` by one step and returns the mean absolute change of the
    /// hidden channels. On a numeric fault the grid may be partially updated.
    pub fn step(&mut self, grid: &mut ChannelGrid, rng: &mut Rng) -> Result<StepOutcome> {
        if grid.height() != self.height || grid.width() != self.width {
            return Err(Error::Config("grid shape changed between steps".into()));
        }
        check_channels(grid, self.spec)?;
        self.steps_taken += 1;
        let step = self.steps_taken;
        let c = self.spec.channels;
        let fire_rate = self.spec.fire_rate;

        self.update.fill(0.0);
        let mut fired = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                if rng.next_f32() >= fire_rate {
                    continue;
                }
                fired += 1;
                perceive_into(grid, &self.taps_a, &self.taps_b, x, y, &mut self.perception);
                let start = grid.index(y, x, 0);
                mlp_into(
                    self.spec,
                    self.kernel,
                    &self.perception,
                    &mut self.hidden,
                    &mut self.update[start..start + c],
                );
            }
        }

        let hidden_end = c - 1;
        let mut delta_sum = 0.0f64;
        let width = self.width;
        for (cell_idx, (state, upd)) in grid
            .data_mut()
            .chunks_exact_mut(c)
            .zip(self.update.chunks_exact(c))
            .enumerate()
        {
            for ch in RGB_CHANNELS..c {
                let old = state[ch];
                let new = old + upd[ch];
                if !new.is_finite() {
                    return Err(Error::NumericFault {
                        step,
                        x: cell_idx % width,
                        y: cell_idx / width,
                        channel: ch,
                    });
                }
                if ch < hidden_end {
                    delta_sum += (new - old).abs() as f64;
                }
                state[ch] = new;
            }
        }
        let entries = self.height * self.width * (hidden_end - RGB_CHANNELS);
        Ok(StepOutcome {
            hidden_delta: (delta_sum / entries as f64) as f32,
            fired_cells: fired,
        })
    }
}

/// Single step with a throwaway update buffer. Prefer [`run`] for loops.
pub fn nca_step(grid: &mut ChannelGrid, spec: &ModelSpec, rng: &mut Rng) -> Result<StepOutcome> {
    Stepper::new(spec, grid, Kernel::default())?.step(grid, rng)
}

/// Runs the schedule in place and returns the per-step trace.
///
/// The fire decisions come from the `FIRE` sub-stream of `config.seed`.
pub fn run(grid: &mut ChannelGrid, spec: &ModelSpec, config: &StepConfig) -> Result<StepTrace> {
    config.validate()?;
    let mut stepper = Stepper::new(spec, grid, config.kernel)?;
    let mut rng = Rng::for_stream(config.seed, rng::stream::FIRE);
    let mut es_state = config.early_stop.map(|es| es.initial_state());
    let mut trace = StepTrace {
        entries: Vec::with_capacity(config.max_steps),
        ..Default::default()
    };

    let started = Instant::now();
    for step in 1..=config.max_steps {
        let outcome = stepper.step(grid, &mut rng)?;
        let mut stop = false;
        if let (Some(es), Some(state)) = (&config.early_stop, es_state.as_mut()) {
            let (s, next) = es.check(*state, outcome.hidden_delta);
            *state = next;
            stop = s;
        }
        trace.entries.push(StepEntry {
            step,
            hidden_delta: outcome.hidden_delta,
            fired_cells: outcome.fired_cells,
            stopped_early: stop,
        });
        trace.total_steps = step;
        if stop {
            trace.stopped_early = true;
            break;
        }
    }
    trace.elapsed = started.elapsed();
    Ok(trace)
}
