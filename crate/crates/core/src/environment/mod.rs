//! Sealed contextual bandit environments.
//!
//! A [`BanditEnvironment`] bundles a [`StateSet`], an [`ActionSet`] and a
//! [`RewardTransform`]. Interaction is single-step: observe a state, pick
//! an action, receive `reward(state, action)`. Rewards are pure functions
//! of the two rows, so [`BanditEnvironment::best_action`] can give the
//! exact per-state optimum used for regret.

mod format;

use std::collections::BTreeMap;

use crate::dataset::SourceTag;
use crate::encoder::{ActionSet, StateSet};
use crate::error::{Error, Result};
use crate::matrix::norm;
use crate::reward::{cosine, RewardTransform};
use crate::rng::SimRng;
use crate::synth::SynthConfig;

pub use format::{FORMAT_VERSION, MAGIC};

/// How states are presented to the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Independent uniform draws from one seeded stream.
    UniformIid { seed: u64 },
    /// `0, 1, ..., |S|-1, 0, 1, ...`
    RoundRobin,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::UniformIid { seed: 0 }
    }
}

/// Build metadata carried inside environment files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub source_tag: Option<SourceTag>,
    pub preset: Option<String>,
    pub synth: Option<SynthConfig>,
    /// Free-form `key -> value` notes (seeds, truncation sizes, counts).
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnvironment {
    states: StateSet,
    actions: ActionSet,
    transform: RewardTransform,
    sampler: Sampler,
    provenance: Provenance,
}

/// Position in a run's state sequence. Owned by a single run.
#[derive(Debug, Clone)]
pub struct Cursor {
    steps: u64,
    rng: Option<SimRng>,
}

impl Cursor {
    pub fn steps(&self) -> u64 {
        self.steps
    }
}

impl BanditEnvironment {
    pub fn build(
        states: StateSet,
        actions: ActionSet,
        transform: RewardTransform,
        sampler: Sampler,
        provenance: Provenance,
    ) -> Result<Self> {
        if states.dim() != actions.dim() {
            return Err(Error::DimensionMismatch { expected: actions.dim(), actual: states.dim() });
        }
        if actions.len() < 2 {
            return Err(Error::Precondition(format!("need at least 2 actions, got {}", actions.len())));
        }
        if states.is_empty() {
            return Err(Error::Precondition("need at least 1 state".into()));
        }
        transform.validate()?;
        let zero_actions: Vec<usize> = (0..actions.len()).filter(|&i| norm(actions.row(i)) == 0.0).collect();
        if !zero_actions.is_empty() {
            return Err(Error::ZeroRows { kind: "action", indices: zero_actions });
        }
        let zero_states: Vec<usize> = (0..states.len()).filter(|&i| norm(states.row(i)) == 0.0).collect();
        if !zero_states.is_empty() {
            return Err(Error::ZeroRows { kind: "state", indices: zero_states });
        }
        if states.matrix().iter_rows().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Consistency("state entries must be finite".into()));
        }
        Ok(BanditEnvironment { states, actions, transform, sampler, provenance })
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn transform(&self) -> &RewardTransform {
        &self.transform
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn dim(&self) -> usize {
        self.actions.dim()
    }

    /// Same environment with a different state sampler.
    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    /// A fresh cursor at step 0 of this environment's sampler.
    pub fn cursor(&self) -> Cursor {
        Self::cursor_with(self.sampler)
    }

    /// A fresh cursor for an explicit sampler, e.g. a reseeded copy of
    /// this environment's own.
    pub fn cursor_with(sampler: Sampler) -> Cursor {
        let rng = match sampler {
            Sampler::UniformIid { seed } => Some(SimRng::new(seed)),
            Sampler::RoundRobin => None,
        };
        Cursor { steps: 0, rng }
    }

    /// Advances `cursor` and returns the next state index and vector.
    pub fn observe(&self, cursor: &mut Cursor) -> (usize, &[f64]) {
        let n = self.states.len();
        let index = match &mut cursor.rng {
            Some(rng) => rng.index(n),
            None => (cursor.steps % n as u64) as usize,
        };
        cursor.steps += 1;
        (index, self.states.row(index))
    }

    fn check_state(&self, index: usize) -> Result<()> {
        if index >= self.states.len() {
            return Err(Error::IndexOutOfRange { kind: "state", index, len: self.states.len() });
        }
        Ok(())
    }

    /// Reward for taking `action_index` in state `state_index`.
    pub fn step(&self, state_index: usize, action_index: usize) -> Result<f64> {
        self.check_state(state_index)?;
        if action_index >= self.actions.len() {
            return Err(Error::IndexOutOfRange { kind: "action", index: action_index, len: self.actions.len() });
        }
        let c = cosine(self.states.row(state_index), self.actions.row(action_index))?;
        Ok(self.transform.apply(c))
    }

    /// Highest-reward action for a state (smallest index on ties).
    pub fn best_action(&self, state_index: usize) -> Result<(usize, f64)> {
        self.check_state(state_index)?;
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..self.actions.len() {
            let r = self.step(state_index, a)?;
            if r > best.1 {
                best = (a, r);
            }
        }
        Ok(best)
    }

    /// Mean and population variance of the reward over all (state, action) pairs.
    pub fn reward_moments(&self) -> Result<(f64, f64)> {
        let table = crate::reward::reward_table(&self.states, &self.actions, &self.transform)?;
        let n = table.len() as f64;
        let mean = table.iter().sum::<f64>() / n;
        let var = table.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        Ok((mean, var))
    }
}
