//! Bandit agents.
//!
//! All agents are small enough to train in seconds on a preset
//! environment: a uniform baseline, context-free epsilon-greedy, linear UCB
//! with per-action ridge regression, a softmax linear policy trained by a
//! likelihood-ratio gradient, and an oracle that reads the environment's
//! exact best action.

use crate::environment::BanditEnvironment;
use crate::error::{Error, Result};
use crate::matrix::{dot, norm};
use crate::rng::SimRng;

/// What an agent sees at decision time.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub env: &'a BanditEnvironment,
    pub state_index: usize,
    pub state: &'a [f64],
}

pub trait Agent: Send {
    fn act(&mut self, ctx: &Context<'_>) -> Result<usize>;
    fn update(&mut self, state: &[f64], action: usize, reward: f64) -> Result<()>;
}

/// Agent name plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentSpec {
    Uniform,
    EpsilonGreedy { epsilon: f64 },
    LinUcb { beta: f64, ridge: f64, normalize: bool },
    Softmax { learning_rate: f64, normalize: bool },
    Oracle,
}

pub const AGENT_NAMES: &[&str] = &["uniform", "egreedy", "linucb", "softmax", "oracle"];

/// Learning rate of the softmax agent. On a one-state, two-action toy
/// paying 1 for action 0 and 0 for action 1 it reaches P(action 0) > 0.9
/// well before 5,000 updates.
pub const DEFAULT_SOFTMAX_LEARNING_RATE: f64 = 0.1;

impl AgentSpec {
    /// Spec for `name` with default hyperparameters.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "uniform" => AgentSpec::Uniform,
            "egreedy" => AgentSpec::EpsilonGreedy { epsilon: 0.1 },
            "linucb" => AgentSpec::LinUcb { beta: 1.0, ridge: 1.0, normalize: true },
            "softmax" => AgentSpec::Softmax { learning_rate: DEFAULT_SOFTMAX_LEARNING_RATE, normalize: true },
            "oracle" => AgentSpec::Oracle,
            other => {
                return Err(Error::Config(format!(
                    "unknown agent {other:?}; expected one of {}",
                    AGENT_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AgentSpec::Uniform => "uniform",
            AgentSpec::EpsilonGreedy { .. } => "egreedy",
            AgentSpec::LinUcb { .. } => "linucb",
            AgentSpec::Softmax { .. } => "softmax",
            AgentSpec::Oracle => "oracle",
        }
    }

    pub fn build(&self, num_actions: usize, dim: usize, seed: u64) -> Result<Box<dyn Agent>> {
        if num_actions == 0 || dim == 0 {
            return Err(Error::Config("agents need at least one action and one feature".into()));
        }
        Ok(match *self {
            AgentSpec::Uniform => Box::new(UniformAgent { num_actions, dim, rng: SimRng::new(seed) }),
            AgentSpec::EpsilonGreedy { epsilon } => Box::new(EpsilonGreedy::new(num_actions, dim, epsilon, seed)?),
            AgentSpec::LinUcb { beta, ridge, normalize } => Box::new(LinUcb::new(num_actions, dim, beta, ridge, normalize)?),
            AgentSpec::Softmax { learning_rate, normalize } => {
                Box::new(SoftmaxPolicy::new(num_actions, dim, learning_rate, normalize, seed)?)
            }
            AgentSpec::Oracle => Box::new(OracleAgent { dim }),
        })
    }
}

impl std::fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            AgentSpec::EpsilonGreedy { epsilon } => write!(f, "egreedy(epsilon={epsilon})"),
            AgentSpec::LinUcb { beta, ridge, normalize } => {
                write!(f, "linucb(beta={beta}, ridge={ridge}, normalize={normalize})")
            }
            AgentSpec::Softmax { learning_rate, normalize } => {
                write!(f, "softmax(learning_rate={learning_rate}, normalize={normalize})")
            }
            other => f.write_str(other.name()),
        }
    }
}

fn check_dim(expected: usize, state: &[f64]) -> Result<()> {
    if state.len() != expected {
        return Err(Error::DimensionMismatch { expected, actual: state.len() });
    }
    Ok(())
}

fn check_update(num_actions: usize, action: usize, reward: f64) -> Result<()> {
    if action >= num_actions {
        return Err(Error::IndexOutOfRange { kind: "action", index: action, len: num_actions });
    }
    if !reward.is_finite() {
        return Err(Error::NonFiniteReward(reward));
    }
    Ok(())
}

/// Unit-length copy of `state` (unchanged when it is the zero vector).
fn unit(state: &[f64]) -> Vec<f64> {
    let n = norm(state);
    if n == 0.0 {
        state.to_vec()
    } else {
        state.iter().map(|v| v / n).collect()
    }
}

/// Index of the largest value; the first one on ties.
fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub struct UniformAgent {
    num_actions: usize,
    dim: usize,
    rng: SimRng,
}

impl Agent for UniformAgent {
    fn act(&mut self, ctx: &Context<'_>) -> Result<usize> {
        check_dim(self.dim, ctx.state)?;
        Ok(self.rng.index(self.num_actions))
    }

    fn update(&mut self, _state: &[f64], action: usize, reward: f64) -> Result<()> {
        check_update(self.num_actions, action, reward)
    }
}

/// Context-free epsilon-greedy over per-action running means.
pub struct EpsilonGreedy {
    epsilon: f64,
    dim: usize,
    counts: Vec<u64>,
    means: Vec<f64>,
    rng: SimRng,
}

impl EpsilonGreedy {
    pub fn new(num_actions: usize, dim: usize, epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon must be in [0, 1], got {epsilon}")));
        }
        Ok(EpsilonGreedy {
            epsilon,
            dim,
            counts: vec![0; num_actions],
            means: vec![0.0; num_actions],
            rng: SimRng::new(seed),
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Overwrites the value estimates.
    pub fn set_means(&mut self, means: Vec<f64>) {
        assert_eq!(means.len(), self.means.len());
        self.means = means;
    }
}

impl Agent for EpsilonGreedy {
    fn act(&mut self, ctx: &Context<'_>) -> Result<usize> {
        check_dim(self.dim, ctx.state)?;
        if self.rng.next_f64() < self.epsilon {
            return Ok(self.rng.index(self.means.len()));
        }
        Ok(argmax(self.means.iter().copied()))
    }

    fn update(&mut self, _state: &[f64], action: usize, reward: f64) -> Result<()> {
        check_update(self.means.len(), action, reward)?;
        self.counts[action] += 1;
        self.means[action] += (reward - self.means[action]) / self.counts[action] as f64;
        Ok(())
    }
}

/// Linear UCB with a separate ridge regression per action.
///
/// ```text
/// A_a = ridge * I + sum x x^T      b_a = sum r x
/// score_a(x) = (A_a^-1 b_a) . x + beta * sqrt(x^T A_a^-1 x)
/// ```
///
/// `A_a^-1` is maintained with Sherman-Morrison updates. With `normalize`
/// the context is scaled to unit length first; cosine rewards only depend
/// on the direction of the state.
pub struct LinUcb {
    dim: usize,
    beta: f64,
    ridge: f64,
    normalize: bool,
    design: Vec<Vec<f64>>,
    design_inv: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    // A_a^-1 b_a, refreshed on update
    thetas: Vec<Vec<f64>>,
}

impl LinUcb {
    pub fn new(num_actions: usize, dim: usize, beta: f64, ridge: f64, normalize: bool) -> Result<Self> {
        if !(ridge > 0.0 && ridge.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("linucb needs ridge > 0 and beta >= 0, got {ridge}, {beta}")));
        }
        let scaled_identity = |v: f64| {
            let mut m = vec![0.0; dim * dim];
            for i in 0..dim {
                m[i * dim + i] = v;
            }
            m
        };
        Ok(LinUcb {
            dim,
            beta,
            ridge,
            normalize,
            design: vec![scaled_identity(ridge); num_actions],
            design_inv: vec![scaled_identity(1.0 / ridge); num_actions],
            targets: vec![vec![0.0; dim]; num_actions],
            thetas: vec![vec![0.0; dim]; num_actions],
        })
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// `A_a`, row-major `dim x dim`.
    pub fn design_matrix(&self, action: usize) -> &[f64] {
        &self.design[action]
    }

    pub fn design_inverse(&self, action: usize) -> &[f64] {
        &self.design_inv[action]
    }

    fn context(&self, state: &[f64]) -> Vec<f64> {
        if self.normalize {
            unit(state)
        } else {
            state.to_vec()
        }
    }

    fn mat_vec(&self, m: &[f64], x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(&m[i * self.dim..(i + 1) * self.dim], x)).collect()
    }

    /// UCB score of every action for `state`.
    pub fn scores(&self, state: &[f64]) -> Vec<f64> {
        let x = self.context(state);
        (0..self.design.len())
            .map(|a| {
                let ax = self.mat_vec(&self.design_inv[a], &x);
                dot(&self.thetas[a], &x) + self.beta * dot(&x, &ax).max(0.0).sqrt()
            })
            .collect()
    }
}

impl Agent for LinUcb {
    fn act(&mut self, ctx: &Context<'_>) -> Result<usize> {
        check_dim(self.dim, ctx.state)?;
        Ok(argmax(self.scores(ctx.state)))
    }

    fn update(&mut self, state: &[f64], action: usize, reward: f64) -> Result<()> {
        check_update(self.design.len(), action, reward)?;
        check_dim(self.dim, state)?;
        let x = self.context(state);
        let d = self.dim;
        let u = self.mat_vec(&self.design_inv[action], &x);
        let denom = 1.0 + dot(&x, &u);
        let (a, a_inv, b) = (&mut self.design[action], &mut self.design_inv[action], &mut self.targets[action]);
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] += x[i] * x[j];
                a_inv[i * d + j] -= u[i] * u[j] / denom;
            }
            b[i] += reward * x[i];
        }
        self.thetas[action] = self.mat_vec(&self.design_inv[action], &self.targets[action]);
        Ok(())
    }
}

/// Softmax policy over linear scores `W x`, trained with the
/// likelihood-ratio gradient and a running-mean reward baseline:
///
/// ```text
/// W_b += lr * (r - baseline) * (1[b = a] - p_b) * x
/// ```
pub struct SoftmaxPolicy {
    dim: usize,
    learning_rate: f64,
    normalize: bool,
    weights: Vec<Vec<f64>>,
    baseline: f64,
    updates: u64,
    rng: SimRng,
}

impl SoftmaxPolicy {
    pub fn new(num_actions: usize, dim: usize, learning_rate: f64, normalize: bool, seed: u64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {learning_rate}")));
        }
        Ok(SoftmaxPolicy {
            dim,
            learning_rate,
            normalize,
            weights: vec![vec![0.0; dim]; num_actions],
            baseline: 0.0,
            updates: 0,
            rng: SimRng::new(seed),
        })
    }

    fn context(&self, state: &[f64]) -> Vec<f64> {
        if self.normalize {
            unit(state)
        } else {
            state.to_vec()
        }
    }

    /// Action probabilities for `state`.
    pub fn probabilities(&self, state: &[f64]) -> Vec<f64> {
        let x = self.context(state);
        let logits: Vec<f64> = self.weights.iter().map(|w| dot(w, &x)).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / total).collect()
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }
}

impl Agent for SoftmaxPolicy {
    fn act(&mut self, ctx: &Context<'_>) -> Result<usize> {
        check_dim(self.dim, ctx.state)?;
        let probs = self.probabilities(ctx.state);
        let mut acc = 0.0;
        let cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(self.rng.categorical(&cumulative))
    }

    fn update(&mut self, state: &[f64], action: usize, reward: f64) -> Result<()> {
        check_update(self.weights.len(), action, reward)?;
        check_dim(self.dim, state)?;
        let x = self.context(state);
        let probs = self.probabilities(state);
        let advantage = reward - self.baseline;
        for (b, w) in self.weights.iter_mut().enumerate() {
            let indicator = if b == action { 1.0 } else { 0.0 };
            let g = self.learning_rate * advantage * (indicator - probs[b]);
            for (wi, xi) in w.iter_mut().zip(&x) {
                *wi += g * xi;
            }
        }
        self.updates += 1;
        self.baseline += (reward - self.baseline) / self.updates as f64;
        Ok(())
    }
}

/// Always plays the environment's exact best action.
pub struct OracleAgent {
    dim: usize,
}

impl Agent for OracleAgent {
    fn act(&mut self, ctx: &Context<'_>) -> Result<usize> {
        check_dim(self.dim, ctx.state)?;
        Ok(ctx.env.best_action(ctx.state_index)?.0)
    }

    fn update(&mut self, _state: &[f64], _action: usize, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::NonFiniteReward(reward));
        }
        Ok(())
    }
}
