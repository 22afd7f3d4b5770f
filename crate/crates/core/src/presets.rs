//! One-call pipelines for the MovieLens, IMDb and classification setups.
//!
//! MovieLens: keep the 10,000 most active users, then the 100 most rated
//! movies; states are summed over those 100 movies with ratings mapped
//! onto `[0, 1]`; rewards use [`RewardTransform::MovieLensClipRound`].
//!
//! IMDb: the 10,000 most voted titles form the catalog and the first 100
//! of them the action set. States come from 10,000 synthetic users with
//! 50 random ratings each, mapped onto `[-1, 1]`; rewards use
//! [`RewardTransform::ImdbSqrtRound`].
//!
//! Genre tokens outside a preset's vocabulary (`IMAX`, `Adult`, ...) are
//! dropped and counted in the [`BuildReport`].

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::encoder::{ActionSet, FeatureVocabulary, StateSet};
use crate::environment::{BanditEnvironment, Provenance, Sampler};
use crate::error::{Error, Result};
use crate::reward::RewardTransform;
use crate::synth::{generate_states, RatingSupport, SynthConfig};

pub const MOVIELENS_GENRES: [&str; 18] = [
    "Action",
    "Adventure",
    "Animation",
    "Children",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

pub const IMDB_GENRES: [&str; 27] = [
    "Action",
    "Adventure",
    "Animation",
    "Biography",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Family",
    "Fantasy",
    "Film-Noir",
    "Game-Show",
    "History",
    "Horror",
    "Music",
    "Musical",
    "Mystery",
    "News",
    "Reality-TV",
    "Romance",
    "Sci-Fi",
    "Short",
    "Sport",
    "Talk-Show",
    "Thriller",
    "War",
    "Western",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    MovieLens,
    Imdb,
    Classification,
    Generic,
}

impl PresetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::MovieLens => "movielens",
            PresetName::Imdb => "imdb",
            PresetName::Classification => "classification",
            PresetName::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "movielens" => Ok(PresetName::MovieLens),
            "imdb" => Ok(PresetName::Imdb),
            "classification" => Ok(PresetName::Classification),
            "generic" => Ok(PresetName::Generic),
            other => Err(Error::Config(format!(
                "unknown preset {other:?}; expected movielens, imdb, classification or generic"
            ))),
        }
    }
}

/// Where a preset's states come from.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    /// Real users: keep the `top_users` most active ones (`None`: all).
    Users { top_users: Option<usize> },
    /// Synthetic users over a catalog of the `catalog_size` most popular items.
    Synthetic { catalog_size: usize, config: SynthConfig },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetSpec {
    pub name: PresetName,
    /// `None` keeps every distinct feature, sorted.
    pub vocabulary: Option<Vec<String>>,
    /// `None` keeps every item.
    pub top_items: Option<usize>,
    pub states: StateSource,
    pub normalization: (f64, f64),
    pub transform: RewardTransform,
}

impl PresetSpec {
    pub fn movielens() -> Self {
        PresetSpec {
            name: PresetName::MovieLens,
            vocabulary: Some(MOVIELENS_GENRES.iter().map(|s| s.to_string()).collect()),
            top_items: Some(100),
            states: StateSource::Users { top_users: Some(10_000) },
            normalization: (0.0, 1.0),
            transform: RewardTransform::MovieLensClipRound,
        }
    }

    pub fn imdb(seed: u64) -> Self {
        PresetSpec {
            name: PresetName::Imdb,
            vocabulary: Some(IMDB_GENRES.iter().map(|s| s.to_string()).collect()),
            top_items: Some(100),
            states: StateSource::Synthetic { catalog_size: 10_000, config: SynthConfig::imdb(seed) },
            normalization: (-1.0, 1.0),
            transform: RewardTransform::ImdbSqrtRound,
        }
    }

    /// Examples are states, labels are actions, and the reward is 1 exactly
    /// when the chosen label is the example's own.
    pub fn classification() -> Self {
        PresetSpec {
            name: PresetName::Classification,
            vocabulary: None,
            top_items: None,
            states: StateSource::Users { top_users: None },
            normalization: (0.0, 1.0),
            transform: RewardTransform::AffineClip {
                scale: 1.0,
                offset: 0.0,
                round_step: Some(1.0),
                clip_low: 0.0,
                clip_high: 1.0,
            },
        }
    }

    /// Every feature and user kept, feedback mapped onto `[-1, 1]`, reward
    /// equal to the cosine.
    pub fn generic() -> Self {
        PresetSpec {
            name: PresetName::Generic,
            vocabulary: None,
            top_items: None,
            states: StateSource::Users { top_users: None },
            normalization: (-1.0, 1.0),
            transform: RewardTransform::ScaledCosine { alpha: 1.0 },
        }
    }

    pub fn by_name(name: PresetName, seed: u64) -> Self {
        match name {
            PresetName::MovieLens => Self::movielens(),
            PresetName::Imdb => Self::imdb(seed),
            PresetName::Classification => Self::classification(),
            PresetName::Generic => Self::generic(),
        }
    }

    /// Replaces the IMDb rating support with the histogram of item mean
    /// ratings in `dataset`.
    pub fn with_histogram_support(mut self, dataset: &Dataset) -> Result<Self> {
        if let StateSource::Synthetic { config, .. } = &mut self.states {
            config.support = RatingSupport::from_item_means(dataset)?;
        }
        Ok(self)
    }
}

/// What a preset build discarded along the way.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    pub dropped_feature_tokens: usize,
    pub excluded_users: usize,
    /// Catalog rows that encode to the zero vector.
    pub zero_catalog_rows: usize,
}

/// Runs a preset end to end on a parsed dataset.
pub fn build_preset(dataset: &Dataset, spec: &PresetSpec, sampler: Sampler) -> Result<(BanditEnvironment, BuildReport)> {
    let mut report = BuildReport::default();
    let filtered;
    let dataset = match &spec.vocabulary {
        Some(vocab) => {
            let (ds, dropped) = dataset.retain_features(vocab);
            report.dropped_feature_tokens = dropped;
            filtered = ds;
            &filtered
        }
        None => dataset,
    };
    let vocabulary = FeatureVocabulary::build(dataset, spec.vocabulary.as_deref())?;
    let mut notes = BTreeMap::new();
    let top_items = spec.top_items.unwrap_or(usize::MAX);
    if let Some(k) = spec.top_items {
        notes.insert("top_items".to_string(), k.to_string());
    }
    let (states, actions, synth) = match &spec.states {
        StateSource::Users { top_users } => {
            let ds = match top_users {
                Some(k) => {
                    notes.insert("top_users".to_string(), k.to_string());
                    dataset.top_k_users(*k)?
                }
                None => dataset.clone(),
            };
            let ds = ds.top_k_items(top_items);
            let actions = ActionSet::encode(ds.items(), &vocabulary)?;
            let states = StateSet::encode(&ds, &actions, spec.normalization)?;
            (states, actions, None)
        }
        StateSource::Synthetic { catalog_size, config } => {
            let ds = dataset.top_k_items(*catalog_size);
            let catalog = ActionSet::encode(ds.items(), &vocabulary)?;
            report.zero_catalog_rows = catalog.zero_rows().len();
            let (states, _) = generate_states(&catalog, dataset.scale(), spec.normalization, config)?;
            notes.insert("catalog_size".to_string(), catalog.len().to_string());
            (states, catalog.head(top_items), Some(config.clone()))
        }
    };
    report.excluded_users = states.excluded_users();
    notes.insert("excluded_users".to_string(), report.excluded_users.to_string());
    notes.insert("dropped_feature_tokens".to_string(), report.dropped_feature_tokens.to_string());
    notes.insert("normalization".to_string(), format!("{},{}", spec.normalization.0, spec.normalization.1));
    let provenance = Provenance {
        source_tag: Some(dataset.source_tag()),
        preset: Some(spec.name.as_str().to_string()),
        synth,
        notes,
    };
    let env = BanditEnvironment::build(states, actions, spec.transform, sampler, provenance)?;
    Ok((env, report))
}
