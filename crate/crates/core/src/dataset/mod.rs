//! Recommendation datasets in a common in-memory form.
//!
//! A [`Dataset`] is a catalog of [`RawItem`]s (each described by a list of
//! feature strings such as genres) together with the user feedback recorded
//! for them. Parsers exist for MovieLens-style CSV, IMDb-style TSV, a generic
//! column-mapped format and labeled classification data. The truncation
//! helpers [`Dataset::top_k_items`] and [`Dataset::top_k_users`] shrink a
//! dataset to the most popular items or the most active users.

mod generic;
mod parse;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

pub use generic::{parse_generic, write_generic, GenericPaths, GenericSchema};
pub use parse::{parse_classification, parse_imdb, parse_imdb_with, parse_movielens, ImdbOptions};

/// Bounds (and optional granularity) of a dataset's feedback values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackScale {
    min: f64,
    max: f64,
    step: Option<f64>,
}

impl FeedbackScale {
    pub fn new(min: f64, max: f64, step: Option<f64>) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!("feedback scale needs min < max, got [{min}, {max}]")));
        }
        if let Some(step) = step {
            let n = (max - min) / step;
            if !(step > 0.0) || (n - n.round()).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "feedback step {step} does not divide [{min}, {max}]"
                )));
            }
        }
        Ok(FeedbackScale { min, max, step })
    }

    /// MovieLens half-star scale.
    pub fn movielens() -> Self {
        FeedbackScale { min: 0.5, max: 5.0, step: Some(0.5) }
    }

    /// IMDb 10-star scale.
    pub fn imdb() -> Self {
        FeedbackScale { min: 1.0, max: 10.0, step: Some(1.0) }
    }

    /// Binary correct/incorrect scale of the classification adapter.
    pub fn binary() -> Self {
        FeedbackScale { min: 0.0, max: 1.0, step: Some(1.0) }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }

    /// Every value on a discrete scale, ascending.
    pub fn levels(&self) -> Option<Vec<f64>> {
        let step = self.step?;
        let n = ((self.max - self.min) / step).round() as usize;
        Some((0..=n).map(|i| self.min + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawItem {
    pub item_id: String,
    pub title: String,
    /// Distinct features in first-seen order.
    pub features: Vec<String>,
    /// Rating count (MovieLens) or vote count (IMDb).
    pub popularity: f64,
    /// Aggregate rating published with the item, when the source has one
    /// (IMDb `averageRating`).
    pub mean_feedback: Option<f64>,
}

impl RawItem {
    pub fn new(item_id: impl Into<String>, title: impl Into<String>, features: Vec<String>, popularity: f64) -> Self {
        RawItem {
            item_id: item_id.into(),
            title: title.into(),
            features: dedup_features(features),
            popularity,
            mean_feedback: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawInteraction {
    pub user_id: String,
    pub item_id: String,
    pub feedback: f64,
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceTag {
    MovieLens,
    Imdb,
    Generic,
    Classification,
}

impl SourceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTag::MovieLens => "movielens",
            SourceTag::Imdb => "imdb",
            SourceTag::Generic => "generic",
            SourceTag::Classification => "classification",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "movielens" => SourceTag::MovieLens,
            "imdb" => SourceTag::Imdb,
            "generic" => SourceTag::Generic,
            "classification" => SourceTag::Classification,
            _ => return None,
        })
    }
}

impl std::fmt::Display for SourceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Items, the feedback recorded for them and the scale that feedback is on.
///
/// Immutable once built: item ids are unique, every interaction refers to a
/// known item and carries feedback inside the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    items: Vec<RawItem>,
    interactions: Vec<RawInteraction>,
    scale: FeedbackScale,
    source_tag: SourceTag,
}

impl Dataset {
    pub fn new(
        items: Vec<RawItem>,
        interactions: Vec<RawInteraction>,
        scale: FeedbackScale,
        source_tag: SourceTag,
    ) -> Result<Self> {
        let mut ids = HashSet::with_capacity(items.len());
        for item in &items {
            if !ids.insert(item.item_id.as_str()) {
                return Err(Error::Consistency(format!("duplicate item id {:?}", item.item_id)));
            }
        }
        for it in &interactions {
            if !ids.contains(it.item_id.as_str()) {
                return Err(Error::Consistency(format!(
                    "interaction of user {:?} references unknown item {:?}",
                    it.user_id, it.item_id
                )));
            }
            if !scale.contains(it.feedback) {
                return Err(Error::Range { value: it.feedback, min: scale.min, max: scale.max });
            }
        }
        Ok(Dataset { items, interactions, scale, source_tag })
    }

    pub fn items(&self) -> &[RawItem] {
        &self.items
    }

    pub fn interactions(&self) -> &[RawInteraction] {
        &self.interactions
    }

    pub fn scale(&self) -> FeedbackScale {
        self.scale
    }

    pub fn source_tag(&self) -> SourceTag {
        self.source_tag
    }

    pub fn user_count(&self) -> usize {
        self.interactions.iter().map(|i| i.user_id.as_str()).collect::<HashSet<_>>().len()
    }

    /// Keeps the `k` most popular items, in rank order.
    ///
    /// Ranking is by popularity (descending), then item id ascending (see
    /// [`compare_ids`]), then input order. Interactions with dropped items
    /// are removed.
    pub fn top_k_items(&self, k: usize) -> Dataset {
        let mut order: Vec<usize> = (0..self.items.len()).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (&self.items[a], &self.items[b]);
            y.popularity
                .total_cmp(&x.popularity)
                .then_with(|| compare_ids(&x.item_id, &y.item_id))
                .then(a.cmp(&b))
        });
        order.truncate(k);
        let items: Vec<RawItem> = order.iter().map(|&i| self.items[i].clone()).collect();
        let keep: HashSet<&str> = items.iter().map(|i| i.item_id.as_str()).collect();
        let interactions = self
            .interactions
            .iter()
            .filter(|i| keep.contains(i.item_id.as_str()))
            .cloned()
            .collect();
        Dataset { items, interactions, scale: self.scale, source_tag: self.source_tag }
    }

    /// Keeps the interactions of the `k` users with the most interactions
    /// (ties by ascending user id). Items are untouched.
    pub fn top_k_users(&self, k: usize) -> Result<Dataset> {
        if self.interactions.is_empty() {
            return Err(Error::Precondition("top_k_users needs a dataset with interactions".into()));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for it in &self.interactions {
            *counts.entry(it.user_id.as_str()).or_default() += 1;
        }
        let mut users: Vec<(&str, usize)> = counts.into_iter().collect();
        users.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| compare_ids(a.0, b.0)));
        users.truncate(k);
        let keep: HashSet<&str> = users.into_iter().map(|(u, _)| u).collect();
        let interactions = self
            .interactions
            .iter()
            .filter(|i| keep.contains(i.user_id.as_str()))
            .cloned()
            .collect();
        Ok(Dataset { items: self.items.clone(), interactions, scale: self.scale, source_tag: self.source_tag })
    }

    /// Removes every feature outside `allowed` from every item. Returns the
    /// filtered dataset and the number of feature tokens dropped.
    pub fn retain_features(&self, allowed: &[String]) -> (Dataset, usize) {
        let allowed: HashSet<&str> = allowed.iter().map(String::as_str).collect();
        let mut dropped = 0;
        let items = self
            .items
            .iter()
            .map(|item| {
                let mut item = item.clone();
                let before = item.features.len();
                item.features.retain(|f| allowed.contains(f.as_str()));
                dropped += before - item.features.len();
                item
            })
            .collect();
        let ds = Dataset {
            items,
            interactions: self.interactions.clone(),
            scale: self.scale,
            source_tag: self.source_tag,
        };
        (ds, dropped)
    }
}

/// Orders identifiers: all-digit ids compare numerically and sort before
/// any other id; the rest compare bytewise.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    fn numeric(s: &str) -> Option<u128> {
        if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    }
    match (numeric(a), numeric(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

pub(crate) fn dedup_features(features: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    features
        .into_iter()
        .filter(|f| !f.is_empty() && seen.insert(f.clone()))
        .collect()
}

/// Latest-wins deduplication of (user, item) pairs.
///
/// The row with the greatest timestamp is kept; equal or missing timestamps
/// fall back to the last occurrence. Survivors keep their input order.
pub(crate) fn dedup_latest(rows: Vec<RawInteraction>) -> Vec<RawInteraction> {
    let mut winner: HashMap<(&str, &str), usize> = HashMap::new();
    for (idx, row) in rows.iter().enumerate() {
        let key = (row.user_id.as_str(), row.item_id.as_str());
        match winner.get(&key) {
            Some(&prev) if rows[prev].timestamp > row.timestamp => {}
            _ => {
                winner.insert(key, idx);
            }
        }
    }
    let mut keep: Vec<usize> = winner.into_values().collect();
    keep.sort_unstable();
    let mut slots: Vec<Option<RawInteraction>> = rows.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("index kept once")).collect()
}

/// Sets each item's popularity to its number of interactions.
pub(crate) fn count_popularity(items: &mut [RawItem], interactions: &[RawInteraction]) {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for it in interactions {
        *counts.entry(it.item_id.as_str()).or_default() += 1;
    }
    for item in items {
        item.popularity = counts.get(item.item_id.as_str()).copied().unwrap_or(0) as f64;
    }
}
