#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use cbsim::dataset::{parse_imdb, parse_movielens};
use cbsim::presets::{build_preset, PresetSpec, StateSource};
use cbsim::matrix::Matrix;
use cbsim::{ActionSet, BanditEnvironment, Dataset, FeatureVocabulary, Provenance, RewardTransform, Sampler, StateSet};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn movielens_paths() -> (PathBuf, PathBuf) {
    (fixture("movielens/ratings.csv"), fixture("movielens/movies.csv"))
}

pub fn imdb_paths() -> (PathBuf, PathBuf) {
    (fixture("imdb/title.basics.tsv"), fixture("imdb/title.ratings.tsv"))
}

pub fn movielens() -> Dataset {
    let (r, m) = movielens_paths();
    parse_movielens(r, m).unwrap()
}

pub fn imdb() -> Dataset {
    let (b, r) = imdb_paths();
    parse_imdb(b, r).unwrap()
}

pub fn movielens_env() -> BanditEnvironment {
    build_preset(&movielens(), &PresetSpec::movielens(), Sampler::UniformIid { seed: 0 }).unwrap().0
}

/// IMDb preset with a reduced synthetic population.
pub fn imdb_env(users: usize, seed: u64) -> BanditEnvironment {
    let mut spec = PresetSpec::imdb(seed);
    if let StateSource::Synthetic { config, .. } = &mut spec.states {
        config.num_users = users;
    }
    build_preset(&imdb(), &spec, Sampler::UniformIid { seed }).unwrap().0
}

/// Hand-built environment from dense rows.
pub fn toy_env(states: Vec<Vec<f64>>, actions: Vec<Vec<f64>>, transform: RewardTransform, sampler: Sampler) -> BanditEnvironment {
    let d = actions[0].len();
    let vocab = FeatureVocabulary::new((0..d).map(|j| format!("f{j}")).collect()).unwrap();
    let na = actions.len();
    let ns = states.len();
    let actions = ActionSet::from_parts(
        vocab,
        Matrix::from_rows(d, actions).unwrap(),
        (0..na).map(|i| format!("i{i}")).collect(),
        (0..na).map(|i| format!("Item {i}")).collect(),
    )
    .unwrap();
    let states =
        StateSet::from_parts(Matrix::from_rows(d, states).unwrap(), (0..ns).map(|i| format!("u{i}")).collect(), (0.0, 1.0))
            .unwrap();
    BanditEnvironment::build(states, actions, transform, sampler, Provenance::default()).unwrap()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

pub mod oracle;
