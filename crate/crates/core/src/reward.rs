//! Rewards derived from the cosine similarity of a state and an action.
//!
//! The raw signal is `c = <s, a> / (|s| |a|)`, clamped to `[-1, 1]`. A
//! [`RewardTransform`] maps `c` onto the reward scale:
//!
//! | transform | reward |
//! |---|---|
//! | `ScaledCosine { alpha }` | `alpha * c` |
//! | `MovieLensClipRound` | `clip(ceil(2 + 10c) / 2, 0.5, 5.0)` |
//! | `ImdbSqrtRound` | `max(1, ceil(10 * sqrt(1/2 + c/2)))` |
//! | `AffineClip { .. }` | `clip(ceil_to_step(scale * c + offset), low, high)` |
//!
//! `ceil` is the mathematical ceiling, so exact integers are unchanged.
//! The IMDb variant would produce 0 at `c = -1`; it is clamped to 1 so the
//! codomain is `{1, ..., 10}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ordered_float::OrderedFloat;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::encoder::{ActionSet, StateSet};
use crate::error::{Error, Result};
use crate::matrix::dot;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardTransform {
    ScaledCosine {
        alpha: f64,
    },
    MovieLensClipRound,
    ImdbSqrtRound,
    AffineClip {
        scale: f64,
        offset: f64,
        round_step: Option<f64>,
        clip_low: f64,
        clip_high: f64,
    },
}

impl RewardTransform {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RewardTransform::ScaledCosine { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::Config(format!("alpha must be positive, got {alpha}")))
            }
            RewardTransform::AffineClip { scale, offset, round_step, clip_low, clip_high } => {
                if !(scale.is_finite() && offset.is_finite() && clip_low <= clip_high) {
                    return Err(Error::Config("affine transform needs finite scale/offset and low <= high".into()));
                }
                if let Some(step) = round_step {
                    if !(step > 0.0 && step.is_finite()) {
                        return Err(Error::Config(format!("round_step must be positive, got {step}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Maps a cosine value onto the reward scale. `c` is clamped to `[-1, 1]`.
    pub fn apply(&self, c: f64) -> f64 {
        let c = c.clamp(-1.0, 1.0);
        match *self {
            RewardTransform::ScaledCosine { alpha } => alpha * c,
            RewardTransform::MovieLensClipRound => (0.5 * (2.0 + 10.0 * c).ceil()).clamp(0.5, 5.0),
            RewardTransform::ImdbSqrtRound => (10.0 * (0.5 + c / 2.0).sqrt()).ceil().clamp(1.0, 10.0),
            RewardTransform::AffineClip { scale, offset, round_step, clip_low, clip_high } => {
                let v = scale * c + offset;
                let v = match round_step {
                    Some(step) => (v / step).ceil() * step,
                    None => v,
                };
                v.clamp(clip_low, clip_high)
            }
        }
    }

    /// Whether rewards take finitely many values.
    pub fn is_discrete(&self) -> bool {
        match self {
            RewardTransform::ScaledCosine { .. } => false,
            RewardTransform::AffineClip { round_step, .. } => round_step.is_some(),
            _ => true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RewardTransform::ScaledCosine { .. } => "scaled_cosine",
            RewardTransform::MovieLensClipRound => "movielens_clip_round",
            RewardTransform::ImdbSqrtRound => "imdb_sqrt_round",
            RewardTransform::AffineClip { .. } => "affine_clip",
        }
    }
}

impl std::fmt::Display for RewardTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            RewardTransform::ScaledCosine { alpha } => write!(f, "scaled_cosine(alpha={alpha})"),
            RewardTransform::AffineClip { scale, offset, round_step, clip_low, clip_high } => {
                write!(f, "affine_clip(scale={scale}, offset={offset}, ")?;
                match round_step {
                    Some(s) => write!(f, "step={s}, ")?,
                    None => write!(f, "step=none, ")?,
                }
                write!(f, "clip=[{clip_low}, {clip_high}])")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Cosine similarity, clamped to `[-1, 1]`. Zero vectors are an error.
pub fn cosine(s: &[f64], a: &[f64]) -> Result<f64> {
    if s.len() != a.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), actual: a.len() });
    }
    cosine_with_sq_norms(s, a, dot(s, s), dot(a, a))
}

// One square root of the product keeps cos(v, v) at exactly 1.
fn cosine_with_sq_norms(s: &[f64], a: &[f64], ss: f64, aa: f64) -> Result<f64> {
    if ss == 0.0 || aa == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok((dot(s, a) / (ss * aa).sqrt()).clamp(-1.0, 1.0))
}

pub fn reward(s: &[f64], a: &[f64], t: &RewardTransform) -> Result<f64> {
    Ok(t.apply(cosine(s, a)?))
}

/// Cosine of every (state, action) pair, row-major by state. Each entry is
/// bit-identical to [`cosine`] on the same rows.
pub fn cosine_table(states: &StateSet, actions: &ActionSet) -> Result<Vec<f64>> {
    if states.dim() != actions.dim() {
        return Err(Error::DimensionMismatch { expected: actions.dim(), actual: states.dim() });
    }
    let action_sq: Vec<f64> = actions.matrix().iter_rows().map(|a| dot(a, a)).collect();
    let rows: Vec<Vec<f64>> = (0..states.len())
        .into_par_iter()
        .map(|i| {
            let s = states.row(i);
            let ss = dot(s, s);
            (0..actions.len())
                .map(|j| cosine_with_sq_norms(s, actions.row(j), ss, action_sq[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Reward of every (state, action) pair, row-major by state.
pub fn reward_table(states: &StateSet, actions: &ActionSet, t: &RewardTransform) -> Result<Vec<f64>> {
    Ok(cosine_table(states, actions)?.into_iter().map(|c| t.apply(c)).collect())
}

/// Counts of each distinct value.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardHistogram {
    bin_values: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl RewardHistogram {
    pub fn new(bin_values: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if bin_values.len() != counts.len() {
            return Err(Error::Config("histogram needs one count per bin".into()));
        }
        if bin_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("histogram bins must be strictly increasing".into()));
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::Config("histogram is empty".into()));
        }
        Ok(RewardHistogram { bin_values, counts, total })
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut map: BTreeMap<OrderedFloat<f64>, u64> = BTreeMap::new();
        for v in values {
            *map.entry(OrderedFloat(v + 0.0)).or_default() += 1;
        }
        Self::from_map(map)
    }

    fn from_map(map: BTreeMap<OrderedFloat<f64>, u64>) -> Result<Self> {
        let (bins, counts) = map.into_iter().map(|(k, c)| (k.0, c)).unzip();
        Self::new(bins, counts)
    }

    pub fn bin_values(&self) -> &[f64] {
        &self.bin_values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count_of(&self, value: f64) -> u64 {
        self.bin_values
            .iter()
            .position(|&b| b == value)
            .map_or(0, |i| self.counts[i])
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    /// Two-column `value,count` CSV with a header row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("value,count\n");
        for (v, c) in self.bin_values.iter().zip(&self.counts) {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("value,count") {
            return Err(Error::Schema { path: path.into(), message: "expected header value,count".into() });
        }
        let mut bins = Vec::new();
        let mut counts = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row_err = || Error::Row { path: path.into(), line: n as u64 + 2, message: format!("bad row {line:?}") };
            let (v, c) = line.split_once(',').ok_or_else(row_err)?;
            bins.push(v.trim().parse().map_err(|_| row_err())?);
            counts.push(c.trim().parse().map_err(|_| row_err())?);
        }
        Self::new(bins, counts)
    }
}

/// Which (state, action) pairs a histogram counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSampling {
    Exhaustive,
    /// `n` pairs, state then action index drawn uniformly from one stream.
    Sampled { n: usize, seed: u64 },
}

/// Histogram of rewards over (state, action) pairs.
///
/// Continuous transforms need `bin_step`: each reward is then counted in
/// the bin `ceil(r / bin_step) * bin_step`.
pub fn reward_histogram(
    states: &StateSet,
    actions: &ActionSet,
    t: &RewardTransform,
    sampling: PairSampling,
    bin_step: Option<f64>,
) -> Result<RewardHistogram> {
    if let Some(step) = bin_step {
        if !(step > 0.0) {
            return Err(Error::Config(format!("bin step must be positive, got {step}")));
        }
    } else if !t.is_discrete() {
        return Err(Error::Config(format!("{} is continuous; choose a bin step", t.name())));
    }
    let bin = |r: f64| match bin_step {
        Some(step) => (r / step).ceil() * step,
        None => r,
    };
    match sampling {
        PairSampling::Exhaustive => {
            let table = reward_table(states, actions, t)?;
            RewardHistogram::from_values(table.into_iter().map(bin))
        }
        PairSampling::Sampled { n, seed } => {
            if states.is_empty() || actions.is_empty() {
                return Err(Error::Precondition("cannot sample pairs from an empty set".into()));
            }
            let mut rng = SimRng::new(seed);
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let s = rng.index(states.len());
                let a = rng.index(actions.len());
                values.push(bin(reward(states.row(s), actions.row(a), t)?));
            }
            RewardHistogram::from_values(values)
        }
    }
}

/// Histogram of a dataset's recorded feedback. Catalogs without
/// interactions fall back to the items' mean ratings, rounded to the
/// nearest scale level.
pub fn feedback_histogram(dataset: &Dataset) -> Result<RewardHistogram> {
    if !dataset.interactions().is_empty() {
        return RewardHistogram::from_values(dataset.interactions().iter().map(|i| i.feedback));
    }
    let scale = dataset.scale();
    let round = |m: f64| match scale.step() {
        Some(step) => (scale.min() + ((m - scale.min()) / step).round() * step).clamp(scale.min(), scale.max()),
        None => m,
    };
    RewardHistogram::from_values(dataset.items().iter().filter_map(|i| i.mean_feedback).map(round))
}

/// Total variation distance `½ Σ |p1 - p2|` over the union of both supports.
pub fn tv_distance(h1: &RewardHistogram, h2: &RewardHistogram) -> Result<f64> {
    if h1.total == 0 || h2.total == 0 {
        return Err(Error::Config("total variation of an empty histogram".into()));
    }
    let mut diff: BTreeMap<OrderedFloat<f64>, f64> = BTreeMap::new();
    for (v, p) in h1.bin_values.iter().zip(h1.frequencies()) {
        *diff.entry(OrderedFloat(*v)).or_default() += p;
    }
    for (v, p) in h2.bin_values.iter().zip(h2.frequencies()) {
        *diff.entry(OrderedFloat(*v)).or_default() -= p;
    }
    Ok((0.5 * diff.values().map(|d| d.abs()).sum::<f64>()).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub alpha: f64,
    pub distance: f64,
    /// `(alpha, distance)` for every grid point, in grid order.
    pub curve: Vec<(f64, f64)>,
}

/// Grid search for the cosine scale whose rounded, clipped reward
/// histogram is closest (in total variation) to `target`. Ties go to the
/// smallest `alpha`.
pub fn calibrate_alpha(
    states: &StateSet,
    actions: &ActionSet,
    target: &RewardHistogram,
    grid: &[f64],
    round_step: f64,
    clip: (f64, f64),
) -> Result<Calibration> {
    if grid.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Config(format!("alpha grid values must be positive, got {bad}")));
    }
    let cosines = cosine_table(states, actions)?;
    let mut curve = Vec::with_capacity(grid.len());
    for &alpha in grid {
        let t = RewardTransform::AffineClip {
            scale: alpha,
            offset: 0.0,
            round_step: Some(round_step),
            clip_low: clip.0,
            clip_high: clip.1,
        };
        t.validate()?;
        let hist = RewardHistogram::from_values(cosines.iter().map(|&c| t.apply(c)))?;
        curve.push((alpha, tv_distance(target, &hist)?));
    }
    let &(alpha, distance) = curve
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .expect("grid nonempty");
    Ok(Calibration { alpha, distance, curve })
}
