//! One-hot item encoding and feedback-weighted user states.
//!
//! Each item becomes the sum of the one-hot vectors of its features, so an
//! action row holds a 1 in every column whose feature the item carries.
//! A user state is the feedback-weighted sum of the action rows of the
//! items that user rated, with feedback first mapped affinely onto a
//! target interval. Pairs without recorded feedback contribute nothing.

use std::collections::{BTreeMap, HashMap};

use crate::dataset::{compare_ids, Dataset, FeedbackScale, RawItem};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Ordered, duplicate-free feature list. Column `j` of every encoded
/// vector corresponds to `features()[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVocabulary {
    features: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureVocabulary {
    pub fn new(features: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            if index.insert(f.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate feature {f:?} in vocabulary")));
            }
        }
        Ok(FeatureVocabulary { features, index })
    }

    /// Vocabulary for `dataset`: `explicit` in its own order (it must cover
    /// every feature in the data), or else the sorted distinct features.
    pub fn build(dataset: &Dataset, explicit: Option<&[String]>) -> Result<Self> {
        match explicit {
            Some(list) => {
                let vocab = Self::new(list.to_vec())?;
                vocab.check_items(dataset.items())?;
                Ok(vocab)
            }
            None => {
                let mut all: Vec<String> =
                    dataset.items().iter().flat_map(|i| i.features.iter().cloned()).collect();
                all.sort();
                all.dedup();
                Self::new(all)
            }
        }
    }

    fn check_items(&self, items: &[RawItem]) -> Result<()> {
        let mut unknown: Vec<String> = items
            .iter()
            .flat_map(|i| &i.features)
            .filter(|f| !self.index.contains_key(f.as_str()))
            .cloned()
            .collect();
        if unknown.is_empty() {
            return Ok(());
        }
        unknown.sort();
        unknown.dedup();
        Err(Error::VocabularyMismatch(unknown))
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn position(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }
}

/// Binary item-by-feature matrix with item provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    vocabulary: FeatureVocabulary,
    matrix: Matrix,
    item_ids: Vec<String>,
    titles: Vec<String>,
    zero_rows: Vec<usize>,
}

impl ActionSet {
    /// Encodes each item as the sum of its features' one-hot vectors.
    /// Items without features get an all-zero row, listed in [`ActionSet::zero_rows`].
    pub fn encode(items: &[RawItem], vocabulary: &FeatureVocabulary) -> Result<Self> {
        vocabulary.check_items(items)?;
        let mut matrix = Matrix::zeros(items.len(), vocabulary.len());
        let mut zero_rows = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let row = matrix.row_mut(i);
            for f in &item.features {
                row[vocabulary.index[f.as_str()]] = 1.0;
            }
            if item.features.is_empty() {
                zero_rows.push(i);
            }
        }
        Ok(ActionSet {
            vocabulary: vocabulary.clone(),
            matrix,
            item_ids: items.iter().map(|i| i.item_id.clone()).collect(),
            titles: items.iter().map(|i| i.title.clone()).collect(),
            zero_rows,
        })
    }

    /// Reassembles an action set from stored parts (used when loading
    /// environment files). Entries must be 0 or 1.
    pub fn from_parts(
        vocabulary: FeatureVocabulary,
        matrix: Matrix,
        item_ids: Vec<String>,
        titles: Vec<String>,
    ) -> Result<Self> {
        if matrix.cols() != vocabulary.len() {
            return Err(Error::DimensionMismatch { expected: vocabulary.len(), actual: matrix.cols() });
        }
        if item_ids.len() != matrix.rows() || titles.len() != matrix.rows() {
            return Err(Error::Consistency("action provenance length differs from row count".into()));
        }
        if matrix.iter_rows().flatten().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Consistency("action entries must be 0 or 1".into()));
        }
        let zero_rows = (0..matrix.rows()).filter(|&i| matrix.row(i).iter().all(|&v| v == 0.0)).collect();
        Ok(ActionSet { vocabulary, matrix, item_ids, titles, zero_rows })
    }

    pub fn vocabulary(&self) -> &FeatureVocabulary {
        &self.vocabulary
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn titles(&self) -> &[String] {
        &self.titles
    }

    /// Indices of items that carry no feature.
    pub fn zero_rows(&self) -> &[usize] {
        &self.zero_rows
    }

    /// The first `k` rows (the whole set when `k` exceeds its size).
    pub fn head(&self, k: usize) -> ActionSet {
        let k = k.min(self.len());
        ActionSet {
            vocabulary: self.vocabulary.clone(),
            matrix: self.matrix.select_rows(|i| i < k),
            item_ids: self.item_ids[..k].to_vec(),
            titles: self.titles[..k].to_vec(),
            zero_rows: self.zero_rows.iter().copied().filter(|&i| i < k).collect(),
        }
    }
}

/// Affine map of `value` from the feedback scale onto `target`.
///
/// Scale endpoints land exactly on the target endpoints.
pub fn normalize_feedback(value: f64, scale: FeedbackScale, target: (f64, f64)) -> Result<f64> {
    if !scale.contains(value) {
        return Err(Error::Range { value, min: scale.min(), max: scale.max() });
    }
    if !(target.0 < target.1) {
        return Err(Error::Config(format!("normalization target [{}, {}] is empty", target.0, target.1)));
    }
    let t = (value - scale.min()) / (scale.max() - scale.min());
    Ok((1.0 - t) * target.0 + t * target.1)
}

/// Real user-by-feature matrix with user provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    matrix: Matrix,
    user_ids: Vec<String>,
    norm_range: (f64, f64),
    excluded_users: usize,
}

impl StateSet {
    pub fn from_parts(matrix: Matrix, user_ids: Vec<String>, norm_range: (f64, f64)) -> Result<Self> {
        if user_ids.len() != matrix.rows() {
            return Err(Error::Consistency("state provenance length differs from row count".into()));
        }
        Ok(StateSet { matrix, user_ids, norm_range, excluded_users: 0 })
    }

    /// Builds one state per user from sparse `(action row, raw feedback)`
    /// lists. Users whose state comes out as the zero vector are left out
    /// and counted in [`StateSet::excluded_users`].
    pub fn from_feedback(
        actions: &ActionSet,
        users: Vec<(String, Vec<(usize, f64)>)>,
        scale: FeedbackScale,
        target: (f64, f64),
    ) -> Result<Self> {
        let dim = actions.dim();
        let mut rows = Vec::with_capacity(users.len());
        let mut user_ids = Vec::with_capacity(users.len());
        let mut excluded = 0;
        for (user, feedback) in users {
            let mut state = vec![0.0; dim];
            for (row, value) in feedback {
                if row >= actions.len() {
                    return Err(Error::IndexOutOfRange { kind: "action", index: row, len: actions.len() });
                }
                let f = normalize_feedback(value, scale, target)?;
                for (s, a) in state.iter_mut().zip(actions.row(row)) {
                    *s += f * a;
                }
            }
            if state.iter().all(|&v| v == 0.0) {
                excluded += 1;
                continue;
            }
            rows.push(state);
            user_ids.push(user);
        }
        let matrix = Matrix::from_rows(dim, rows).expect("rows built with action dimension");
        Ok(StateSet { matrix, user_ids, norm_range: target, excluded_users: excluded })
    }

    /// Encodes every user of `dataset` against `actions`. Users are ordered
    /// by id; every interaction must refer to an item present in `actions`.
    pub fn encode(dataset: &Dataset, actions: &ActionSet, target: (f64, f64)) -> Result<Self> {
        let rows: HashMap<&str, usize> =
            actions.item_ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut by_user: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
        for it in dataset.interactions() {
            let &row = rows.get(it.item_id.as_str()).ok_or_else(|| {
                Error::Consistency(format!("item {:?} is not in the action catalog", it.item_id))
            })?;
            by_user.entry(it.user_id.as_str()).or_default().push((row, it.feedback));
        }
        let mut users: Vec<(String, Vec<(usize, f64)>)> =
            by_user.into_iter().map(|(u, fb)| (u.to_owned(), fb)).collect();
        users.sort_by(|a, b| compare_ids(&a.0, &b.0));
        Self::from_feedback(actions, users, dataset.scale(), target)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn norm_range(&self) -> (f64, f64) {
        self.norm_range
    }

    /// Users dropped because their encoded state was all zeros.
    pub fn excluded_users(&self) -> usize {
        self.excluded_users
    }
}
