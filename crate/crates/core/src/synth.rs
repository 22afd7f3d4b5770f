//! Synthetic users for catalogs that come without per-user feedback.
//!
//! Each simulated user rates a fixed number of distinct catalog items,
//! chosen uniformly without replacement, with values drawn from a
//! [`RatingSupport`]. User `u` draws from its own stream seeded with
//! [`derive_seed`]`(seed, u)`, so generation is reproducible and can run
//! in parallel.

use rayon::prelude::*;

use crate::dataset::{Dataset, FeedbackScale};
use crate::encoder::{ActionSet, StateSet};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SimRng};

/// Discrete distribution of synthetic feedback values.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSupport {
    values: Vec<f64>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RatingSupport {
    pub fn new(values: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probabilities.len() {
            return Err(Error::Config("rating support needs one probability per value".into()));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Config("rating probabilities must be nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("rating probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("nonempty") = 1.0;
        Ok(RatingSupport { values, probabilities, cumulative })
    }

    /// Uniform over every level of a discrete scale (1..=10 for IMDb).
    pub fn uniform(scale: FeedbackScale) -> Result<Self> {
        let values = scale
            .levels()
            .ok_or_else(|| Error::Config("uniform rating support needs a discrete scale".into()))?;
        let p = 1.0 / values.len() as f64;
        let mut probs = vec![p; values.len()];
        let rest: f64 = probs[1..].iter().sum();
        probs[0] = 1.0 - rest;
        Self::new(values, probs)
    }

    /// Histogram of the items' published mean ratings, each rounded to the
    /// nearest scale level (the `imdb_histogram` preset).
    pub fn from_item_means(dataset: &Dataset) -> Result<Self> {
        let scale = dataset.scale();
        let levels = scale
            .levels()
            .ok_or_else(|| Error::Config("item-mean rating support needs a discrete scale".into()))?;
        let step = scale.step().expect("discrete scale");
        let mut counts = vec![0usize; levels.len()];
        for m in dataset.items().iter().filter_map(|i| i.mean_feedback) {
            let k = ((m - scale.min()) / step).round().clamp(0.0, (levels.len() - 1) as f64) as usize;
            counts[k] += 1;
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::Config("no item carries a mean rating".into()));
        }
        let mut probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let last = probs.iter().rposition(|&p| p > 0.0).expect("total > 0");
        let rest: f64 = probs.iter().enumerate().filter(|&(i, _)| i != last).map(|(_, p)| p).sum();
        probs[last] = 1.0 - rest;
        Self::new(levels, probs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn sample(&self, rng: &mut SimRng) -> f64 {
        self.values[rng.categorical(&self.cumulative)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_users: usize,
    pub num_nonzero: usize,
    pub support: RatingSupport,
    pub seed: u64,
}

impl SynthConfig {
    /// 10,000 users with 50 uniformly drawn ratings each on the IMDb scale.
    pub fn imdb(seed: u64) -> Self {
        SynthConfig {
            num_users: 10_000,
            num_nonzero: 50,
            support: RatingSupport::uniform(FeedbackScale::imdb()).expect("discrete scale"),
            seed,
        }
    }
}

/// One simulated user's nonzero feedback: ascending catalog indices and
/// the value given to each.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFeedback {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn simulate_feedback(catalog_size: usize, config: &SynthConfig) -> Result<Vec<SparseFeedback>> {
    if config.num_nonzero == 0 || config.num_users == 0 {
        return Err(Error::Config("synthetic users need positive user and rating counts".into()));
    }
    if config.num_nonzero > catalog_size {
        return Err(Error::Config(format!(
            "cannot give {} distinct ratings over a catalog of {catalog_size}",
            config.num_nonzero
        )));
    }
    Ok((0..config.num_users)
        .into_par_iter()
        .map(|u| {
            let mut rng = SimRng::new(derive_seed(config.seed, u as u64));
            let indices = rng.sample_distinct(catalog_size, config.num_nonzero);
            let values = indices.iter().map(|_| config.support.sample(&mut rng)).collect();
            SparseFeedback { indices, values }
        })
        .collect())
}

pub fn synthetic_user_id(index: usize) -> String {
    format!("synth-{index:05}")
}

/// Simulates feedback over every row of `catalog` and encodes the states.
/// Returns the states together with the feedback they were built from.
pub fn generate_states(
    catalog: &ActionSet,
    scale: FeedbackScale,
    target: (f64, f64),
    config: &SynthConfig,
) -> Result<(StateSet, Vec<SparseFeedback>)> {
    if let Some(v) = config.support.values().iter().find(|v| !scale.contains(**v)) {
        return Err(Error::Config(format!("rating value {v} outside the feedback scale")));
    }
    let feedback = simulate_feedback(catalog.len(), config)?;
    let users = feedback
        .iter()
        .enumerate()
        .map(|(u, fb)| (synthetic_user_id(u), fb.indices.iter().copied().zip(fb.values.iter().copied()).collect()))
        .collect();
    let states = StateSet::from_feedback(catalog, users, scale, target)?;
    Ok((states, feedback))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(users: usize, nonzero: usize, seed: u64) -> SynthConfig {
        SynthConfig {
            num_users: users,
            num_nonzero: nonzero,
            support: RatingSupport::uniform(FeedbackScale::imdb()).unwrap(),
            seed,
        }
    }

    #[test]
    fn exact_sparsity() {
        let fb = simulate_feedback(10_000, &config(20, 50, 1)).unwrap();
        for user in &fb {
            assert_eq!(user.indices.len(), 50);
            assert!(user.indices.windows(2).all(|w| w[0] < w[1]));
            assert!(user.indices.iter().all(|&i| i < 10_000));
        }
    }

    #[test]
    fn exhaustive_sample() {
        let fb = simulate_feedback(30, &config(3, 30, 2)).unwrap();
        for user in fb {
            assert_eq!(user.indices, (0..30).collect::<Vec<_>>());
        }
    }

    #[test]
    fn too_many_nonzero() {
        assert!(matches!(simulate_feedback(10, &config(1, 11, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = simulate_feedback(500, &config(10, 50, 7)).unwrap();
        let b = simulate_feedback(500, &config(10, 50, 7)).unwrap();
        let c = simulate_feedback(500, &config(10, 50, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn support_must_sum_to_one() {
        assert!(RatingSupport::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(RatingSupport::new(vec![1.0, 2.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn marginal_frequencies_within_three_standard_errors() {
        let fb = simulate_feedback(1_000, &config(1_000, 50, 11)).unwrap();
        let n = 50_000.0;
        let mut counts = [0usize; 10];
        for user in &fb {
            for v in &user.values {
                counts[*v as usize - 1] += 1;
            }
        }
        let (p, se) = (0.1, (0.1f64 * 0.9 / n).sqrt());
        for c in counts {
            assert!((c as f64 / n - p).abs() < 3.0 * se, "{counts:?}");
        }
    }
}
