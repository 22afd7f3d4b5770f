//! Turn recommendation and classification datasets into contextual bandit
//! environments.
//!
//! The pipeline is: parse a [`Dataset`], one-hot encode its items into an
//! [`ActionSet`], sum normalized feedback into a [`StateSet`], and seal both
//! with a [`RewardTransform`] into a [`BanditEnvironment`]. The
//! [`harness`] then runs [`agents`] against it.
//!
//! ```
//! use cbsim::{BanditEnvironment, RewardTransform, Sampler, Provenance};
//! use cbsim::encoder::{ActionSet, FeatureVocabulary, StateSet};
//! use cbsim::matrix::Matrix;
//!
//! let vocab = FeatureVocabulary::new(vec!["a".into(), "b".into()]).unwrap();
//! let actions = ActionSet::from_parts(
//!     vocab,
//!     Matrix::from_rows(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
//!     vec!["x".into(), "y".into()],
//!     vec!["X".into(), "Y".into()],
//! ).unwrap();
//! let states = StateSet::from_parts(
//!     Matrix::from_rows(2, vec![vec![1.0, 0.0]]).unwrap(),
//!     vec!["u".into()],
//!     (0.0, 1.0),
//! ).unwrap();
//! let env = BanditEnvironment::build(
//!     states, actions, RewardTransform::ScaledCosine { alpha: 1.0 },
//!     Sampler::RoundRobin, Provenance::default(),
//! ).unwrap();
//! assert_eq!(env.step(0, 0).unwrap(), 1.0);
//! assert_eq!(env.best_action(0).unwrap(), (0, 1.0));
//! ```

pub mod agents;
pub mod dataset;
pub mod encoder;
pub mod environment;
mod error;
pub mod harness;
pub mod matrix;
pub mod plot;
pub mod presets;
pub mod reward;
pub mod rng;
pub mod synth;

pub use dataset::{Dataset, FeedbackScale, RawInteraction, RawItem, SourceTag};
pub use encoder::{ActionSet, FeatureVocabulary, StateSet};
pub use environment::{BanditEnvironment, Provenance, Sampler};
pub use error::{Error, ErrorClass, Result};
pub use reward::{RewardHistogram, RewardTransform};

// The guide's code blocks run as doctests of these empty modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/rewards.md")]
    mod rewards {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/agents.md")]
    mod agents {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
