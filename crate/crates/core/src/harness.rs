//! Agent/environment runs, learning curves and cumulative regret.
//!
//! A run repeats observe → act → step → update for a fixed number of
//! steps. Each step also records the exact best reward for the observed
//! state, so the per-step regret `best - received` is always available.
//!
//! Seeds: a run with seed `s` draws states from the environment sampler
//! reseeded with `derive_seed(sampler_seed, s)` and builds its agent with
//! `derive_seed(s, 1)`. Repeat `k` of a comparison runs with
//! `derive_seed(config.seed, k)`, so every agent sees the same state
//! sequence within a repeat.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::agents::{AgentSpec, Context};
use crate::environment::{BanditEnvironment, Cursor, Sampler};
use crate::error::{Error, Result};
use crate::plot::{line_chart, Series};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub num_steps: usize,
    pub seed: u64,
    pub agent: AgentSpec,
    pub moving_average_window: usize,
}

impl RunConfig {
    pub fn new(agent: AgentSpec, num_steps: usize, seed: u64) -> Self {
        RunConfig { num_steps, seed, agent, moving_average_window: 500.min(num_steps.max(1)) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_steps == 0 {
            return Err(Error::Config("num_steps must be positive".into()));
        }
        if self.moving_average_window == 0 || self.moving_average_window > self.num_steps {
            return Err(Error::Config(format!(
                "moving average window must be in 1..={}, got {}",
                self.num_steps, self.moving_average_window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction {
    pub step_index: usize,
    pub state_index: usize,
    pub action_index: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub mean_reward_overall: f64,
    pub mean_reward_last_window: f64,
    pub total_regret: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub agent: String,
    pub window: usize,
    pub interactions: Vec<Interaction>,
    pub reward_series: Vec<f64>,
    /// Exact best reward for each step's state.
    pub best_reward_series: Vec<f64>,
    /// Running sum of `best - received`.
    pub regret_series: Vec<f64>,
    pub summary: Summary,
}

fn run_cursor(env: &BanditEnvironment, seed: u64) -> Cursor {
    match env.sampler() {
        Sampler::UniformIid { seed: base } => {
            BanditEnvironment::cursor_with(Sampler::UniformIid { seed: derive_seed(base, seed) })
        }
        Sampler::RoundRobin => env.cursor(),
    }
}

/// Runs one agent for `config.num_steps` interactions.
pub fn run(env: &BanditEnvironment, config: &RunConfig) -> Result<RunMetrics> {
    config.validate()?;
    let mut agent = config.agent.build(env.num_actions(), env.dim(), derive_seed(config.seed, 1))?;
    let mut cursor = run_cursor(env, config.seed);
    let n = config.num_steps;
    let mut interactions = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    let mut best = Vec::with_capacity(n);
    let mut regret = Vec::with_capacity(n);
    let mut cumulative = 0.0;
    for step in 0..n {
        let (state_index, state) = env.observe(&mut cursor);
        let action = agent.act(&Context { env, state_index, state })?;
        let reward = env.step(state_index, action)?;
        agent.update(state, action, reward)?;
        let (_, best_reward) = env.best_action(state_index)?;
        if best_reward < reward {
            return Err(Error::Consistency(format!("step {step}: reward {reward} exceeds oracle {best_reward}")));
        }
        cumulative += best_reward - reward;
        interactions.push(Interaction { step_index: step, state_index, action_index: action, reward });
        rewards.push(reward);
        best.push(best_reward);
        regret.push(cumulative);
    }
    let w = config.moving_average_window;
    let summary = Summary {
        mean_reward_overall: mean(&rewards),
        mean_reward_last_window: mean(&rewards[n - w..]),
        total_regret: cumulative,
    };
    Ok(RunMetrics {
        agent: config.agent.name().to_string(),
        window: w,
        interactions,
        reward_series: rewards,
        best_reward_series: best,
        regret_series: regret,
        summary,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Trailing moving average with an expanding head: element `i` is the mean
/// of the last `min(i + 1, window)` values.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Config("moving average of an empty series".into()));
    }
    if window == 0 {
        return Err(Error::Config("moving average window must be positive".into()));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, &v) in series.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= series[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    Ok(out)
}

/// Mean and sample standard deviation (0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn of(xs: &[f64]) -> Stat {
        let m = mean(xs);
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        };
        Stat { mean: m, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub agent: String,
    pub spec: AgentSpec,
    pub repeats: usize,
    pub mean_reward: Stat,
    pub last_window_reward: Stat,
    pub total_regret: Stat,
    /// Per-repeat summaries, in repeat order.
    pub runs: Vec<Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// Moving-average reward curve of each agent's first repeat.
    pub curves: Vec<Series>,
}

/// Runs every config `repeats` times (repeat `k` uses
/// `derive_seed(config.seed, k)`) and aggregates the summaries.
pub fn compare(env: &BanditEnvironment, configs: &[RunConfig], repeats: usize) -> Result<ComparisonTable> {
    if configs.is_empty() {
        return Err(Error::Config("compare needs at least one agent".into()));
    }
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len()).flat_map(|c| (0..repeats).map(move |r| (c, r))).collect();
    let results: Vec<RunMetrics> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let cfg = RunConfig { seed: derive_seed(configs[c].seed, r as u64), ..configs[c].clone() };
            run(env, &cfg)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(configs.len());
    let mut curves = Vec::with_capacity(configs.len());
    for (c, cfg) in configs.iter().enumerate() {
        let runs: Vec<&RunMetrics> = results[c * repeats..(c + 1) * repeats].iter().collect();
        let pick = |f: fn(&Summary) -> f64| runs.iter().map(|m| f(&m.summary)).collect::<Vec<_>>();
        rows.push(ComparisonRow {
            agent: cfg.agent.name().to_string(),
            spec: cfg.agent,
            repeats,
            mean_reward: Stat::of(&pick(|s| s.mean_reward_overall)),
            last_window_reward: Stat::of(&pick(|s| s.mean_reward_last_window)),
            total_regret: Stat::of(&pick(|s| s.total_regret)),
            runs: runs.iter().map(|m| m.summary).collect(),
        });
        curves.push(Series {
            label: cfg.agent.name().to_string(),
            values: moving_average(&runs[0].reward_series, cfg.moving_average_window)?,
        });
    }
    Ok(ComparisonTable { rows, curves })
}

pub const METRICS_HEADER: &str = "step,reward,moving_avg,cumulative_regret";

/// Per-step CSV: `step,reward,moving_avg,cumulative_regret`.
pub fn metrics_csv(metrics: &RunMetrics) -> Result<String> {
    let mut out = format!("{METRICS_HEADER}\n");
    if metrics.reward_series.is_empty() {
        return Ok(out);
    }
    let ma = moving_average(&metrics.reward_series, metrics.window.max(1))?;
    for (i, ((r, m), g)) in metrics.reward_series.iter().zip(&ma).zip(&metrics.regret_series).enumerate() {
        let _ = writeln!(out, "{i},{r},{m},{g}");
    }
    Ok(out)
}

pub fn export_csv(metrics: &RunMetrics, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, metrics_csv(metrics)?).map_err(|e| Error::io(path, e))
}

pub const TABLE_HEADER: &str = "agent,repeats,mean_reward,mean_reward_sd,last_window_reward,last_window_reward_sd,total_regret,total_regret_sd";

pub fn table_csv(table: &ComparisonTable) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.agent,
            r.repeats,
            r.mean_reward.mean,
            r.mean_reward.std,
            r.last_window_reward.mean,
            r.last_window_reward.std,
            r.total_regret.mean,
            r.total_regret.std
        );
    }
    out
}

pub fn export_table_csv(table: &ComparisonTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, table_csv(table)).map_err(|e| Error::io(path, e))
}

/// Writes an SVG line chart with one polyline per series.
pub fn export_plot(series: &[Series], title: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, line_chart(series, title, "step", "reward")).map_err(|e| Error::io(path, e))
}
