use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-activity cut-off: once `min_steps` steps have run, every step whose
/// hidden delta stays below `delta_threshold` decrements a cooldown counter,
/// and any step at or above the threshold resets it. Inference halts when the
/// counter reaches zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub min_steps: usize,
    pub delta_threshold: f32,
    pub cooldown_init: usize,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self {
            min_steps: 10,
            delta_threshold: 0.1,
            cooldown_init: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EarlyStopState {
    /// Steps completed before the one being judged.
    pub steps_done: usize,
    pub cooldown: usize,
}

impl EarlyStop {
    pub fn validate(&self) -> Result<()> {
        if self.min_steps < 1 {
            return Err(Error::Config("min_steps must be at least 1".into()));
        }
        if !(self.delta_threshold > 0.0 && self.delta_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "delta_threshold must be positive, got {}",
                self.delta_threshold
            )));
        }
        if self.cooldown_init < 1 {
            return Err(Error::Config("cooldown must be at least 1".into()));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> EarlyStopState {
        EarlyStopState {
            steps_done: 0,
            cooldown: self.cooldown_init,
        }
    }

    /// Judges the step that just produced `hidden_delta`.
    ///
    /// With the defaults and a permanently quiet grid the first decrement
    /// happens on step 11 and the stop is signalled on step 15.
    pub fn check(&self, state: EarlyStopState, hidden_delta: f32) -> (bool, EarlyStopState) {
        let steps_done = state.steps_done + 1;
        if state.steps_done < self.min_steps {
            return (
                false,
                EarlyStopState {
                    steps_done,
                    cooldown: self.cooldown_init,
                },
            );
        }
        if hidden_delta < self.delta_threshold {
            let cooldown = state.cooldown.saturating_sub(1);
            (cooldown == 0, EarlyStopState { steps_done, cooldown })
        } else {
            (
                false,
                EarlyStopState {
                    steps_done,
                    cooldown: self.cooldown_init,
                },
            )
        }
    }

    /// Step number (1-based) at which a delta sequence triggers the stop, if any.
    pub fn stop_step(&self, deltas: impl IntoIterator<Item = f32>) -> Option<usize> {
        let mut state = self.initial_state();
        for (i, d) in deltas.into_iter().enumerate() {
            let (stop, next) = self.check(state, d);
            if stop {
                return Some(i + 1);
            }
            state = next;
        }
        None
    }
}
