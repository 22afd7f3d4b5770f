mod common;

use cbsim::encoder::normalize_feedback;
use cbsim::presets::{PresetSpec, IMDB_GENRES, MOVIELENS_GENRES};
use cbsim::synth::{generate_states, RatingSupport, SynthConfig};
use cbsim::{ActionSet, Dataset, Error, FeatureVocabulary, FeedbackScale, RawInteraction, RawItem, SourceTag, StateSet};
use common::oracle;

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn item(id: &str, features: &[&str]) -> RawItem {
    RawItem::new(id, id, strings(features), 1.0)
}

fn catalog(items: Vec<RawItem>, feedback: &[(&str, &str, f64)]) -> Dataset {
    let rows = feedback
        .iter()
        .map(|(u, i, f)| RawInteraction { user_id: u.to_string(), item_id: i.to_string(), feedback: *f, timestamp: None })
        .collect();
    Dataset::new(items, rows, FeedbackScale::new(0.0, 1.0, None).unwrap(), SourceTag::Generic).unwrap()
}

#[test]
fn vocabulary_sizes_and_order() {
    assert_eq!(FeatureVocabulary::new(strings(&MOVIELENS_GENRES)).unwrap().len(), 18);
    assert_eq!(FeatureVocabulary::new(strings(&IMDB_GENRES)).unwrap().len(), 27);
    let ds = catalog(vec![item("1", &["x"]), item("2", &["y", "x"])], &[]);
    assert_eq!(FeatureVocabulary::build(&ds, None).unwrap().features(), ["x", "y"]);
    let explicit = strings(&["y", "x", "z"]);
    assert_eq!(FeatureVocabulary::build(&ds, Some(&explicit)).unwrap().features(), ["y", "x", "z"]);
    match FeatureVocabulary::build(&ds, Some(&strings(&["x"]))) {
        Err(Error::VocabularyMismatch(bad)) => assert_eq!(bad, ["y"]),
        other => panic!("{other:?}"),
    }
    assert!(FeatureVocabulary::new(strings(&["a", "a"])).is_err());
}

#[test]
fn action_rows_are_feature_sums() {
    let vocab = FeatureVocabulary::new(strings(&["Action", "Comedy", "Drama"])).unwrap();
    let items = vec![item("1", &["Action", "Drama"]), item("2", &[]), item("3", &["Comedy"]), item("4", &["Drama", "Comedy", "Action"])];
    let actions = ActionSet::encode(&items, &vocab).unwrap();
    assert_eq!(actions.row(0), [1.0, 0.0, 1.0]);
    assert_eq!(actions.row(1), [0.0, 0.0, 0.0]);
    assert_eq!(actions.zero_rows(), [1]);
    for (i, it) in items.iter().enumerate() {
        let l1: f64 = actions.row(i).iter().sum();
        assert_eq!(l1, it.features.len() as f64);
    }
    assert!(matches!(ActionSet::encode(&[item("5", &["Horror"])], &vocab), Err(Error::VocabularyMismatch(_))));
}

#[test]
fn normalization_endpoints() {
    let ml = FeedbackScale::movielens();
    assert_eq!(normalize_feedback(5.0, ml, (0.0, 1.0)).unwrap(), 1.0);
    assert_eq!(normalize_feedback(0.5, ml, (0.0, 1.0)).unwrap(), 0.0);
    assert_eq!(normalize_feedback(2.75, ml, (-1.0, 1.0)).unwrap(), 0.0);
    assert!(matches!(normalize_feedback(5.5, ml, (0.0, 1.0)), Err(Error::Range { .. })));
}

#[test]
fn state_examples() {
    let vocab = FeatureVocabulary::new(strings(&["p", "q", "r"])).unwrap();
    let items = vec![item("y1", &["p", "r"]), item("y2", &["q", "r"]), item("y3", &["q"])];
    let actions = ActionSet::encode(&items, &vocab).unwrap();
    let ds = catalog(items, &[("u", "y1", 1.0), ("u", "y2", 0.5), ("v", "y3", 1.0)]);
    let states = StateSet::encode(&ds, &actions, (0.0, 1.0)).unwrap();
    assert_eq!(states.user_ids(), ["u", "v"]);
    assert_eq!(states.row(0), [1.0, 0.5, 1.5]);
    assert_eq!(states.row(1), [0.0, 1.0, 0.0]);

    let outside = ActionSet::encode(&ds.items()[..2], &vocab).unwrap();
    assert!(matches!(StateSet::encode(&ds, &outside, (0.0, 1.0)), Err(Error::Consistency(_))));
}

#[test]
fn zero_state_users_are_excluded_and_counted() {
    let vocab = FeatureVocabulary::new(strings(&["p"])).unwrap();
    let items = vec![item("a", &["p"]), item("b", &[])];
    let actions = ActionSet::encode(&items, &vocab).unwrap();
    // u rates only the featureless item; w gives the minimum rating, which maps to 0
    let ds = catalog(items, &[("u", "b", 1.0), ("v", "a", 1.0), ("w", "a", 0.0)]);
    let states = StateSet::encode(&ds, &actions, (0.0, 1.0)).unwrap();
    assert_eq!(states.user_ids(), ["v"]);
    assert_eq!(states.excluded_users(), 2);
}

#[test]
fn movielens_states_match_brute_force() {
    let (r, m) = common::movielens_paths();
    let expected = oracle::movielens_states(&r, &m, &MOVIELENS_GENRES, 10_000, 100);
    let env = common::movielens_env();
    let states = env.states();
    assert_eq!(states.len(), expected.len());
    for (i, user) in states.user_ids().iter().enumerate() {
        let want = &expected[user];
        assert!(oracle::max_abs_diff(states.row(i), want) <= 1e-12, "user {user}");
    }
    assert!(states.matrix().iter_rows().flatten().all(|&v| v >= 0.0));
}

#[test]
fn synthetic_states_match_brute_force() {
    let ds = common::imdb();
    let vocab = FeatureVocabulary::new(strings(&IMDB_GENRES)).unwrap();
    let (filtered, _) = ds.retain_features(vocab.features());
    let top = filtered.top_k_items(10_000);
    let actions = ActionSet::encode(top.items(), &vocab).unwrap();
    let rows: Vec<Vec<f64>> = top
        .items()
        .iter()
        .map(|it| IMDB_GENRES.iter().map(|g| if it.features.iter().any(|f| f == g) { 1.0 } else { 0.0 }).collect())
        .collect();
    let config = SynthConfig {
        num_users: 10,
        num_nonzero: 50,
        support: RatingSupport::uniform(FeedbackScale::imdb()).unwrap(),
        seed: 99,
    };
    let (states, feedback) = generate_states(&actions, FeedbackScale::imdb(), (-1.0, 1.0), &config).unwrap();
    assert_eq!(states.len() + states.excluded_users(), 10);
    let mut k = 0;
    for fb in &feedback {
        assert_eq!(fb.indices.len(), 50);
        assert!(fb.values.iter().all(|v| (1.0..=10.0).contains(v) && v.fract() == 0.0));
        let want = oracle::sparse_state(&rows, &fb.indices, &fb.values, (1.0, 10.0), (-1.0, 1.0));
        if want.iter().all(|&v| v == 0.0) {
            continue;
        }
        assert!(oracle::max_abs_diff(states.row(k), &want) <= 1e-12);
        k += 1;
    }
    assert_eq!(k, states.len());
}

#[test]
fn single_feedback_state_is_scaled_row() {
    let vocab = FeatureVocabulary::new(strings(&["a", "b"])).unwrap();
    let actions = ActionSet::encode(&[item("only", &["b"])], &vocab).unwrap();
    let config = SynthConfig {
        num_users: 1,
        num_nonzero: 1,
        support: RatingSupport::new(vec![7.0], vec![1.0]).unwrap(),
        seed: 3,
    };
    let (states, _) = generate_states(&actions, FeedbackScale::imdb(), (0.0, 1.0), &config).unwrap();
    let f = normalize_feedback(7.0, FeedbackScale::imdb(), (0.0, 1.0)).unwrap();
    assert_eq!(states.row(0), [0.0, f]);
}

#[test]
fn imdb_preset_states_come_from_the_catalog() {
    let env = common::imdb_env(200, 5);
    assert_eq!(env.dim(), 27);
    assert_eq!(env.num_actions(), 100);
    let spec = PresetSpec::imdb(5);
    assert_eq!(spec.normalization, (-1.0, 1.0));
    assert_eq!(env.provenance().synth.as_ref().unwrap().num_nonzero, 50);
}
