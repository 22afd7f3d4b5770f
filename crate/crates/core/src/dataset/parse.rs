use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord};

use super::{
    count_popularity, dedup_features, dedup_latest, Dataset, FeedbackScale, RawInteraction, RawItem,
    SourceTag,
};
use crate::error::{Error, Result};

pub(crate) const NO_GENRES: &str = "(no genres listed)";
pub(crate) const IMDB_MISSING: &str = "\\N";

/// Thin wrapper over a `csv::Reader` that keeps the path for error messages.
pub(crate) struct Table {
    path: PathBuf,
    reader: csv::Reader<File>,
    headers: StringRecord,
}

impl Table {
    pub(crate) fn open(path: &Path, delimiter: u8, quoting: bool) -> Result<Table> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = ReaderBuilder::new()
            .delimiter(delimiter)
            .quoting(quoting)
            .has_headers(true)
            .from_reader(file);
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        Ok(Table { path: path.to_path_buf(), reader, headers })
    }

    pub(crate) fn path(&self) -> &Path {
        &self.path
    }

    pub(crate) fn column(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| Error::Schema {
            path: self.path.clone(),
            message: format!("missing column {name:?}"),
        })
    }

    /// Calls `f` with each record and its 1-based line number.
    pub(crate) fn for_each(&mut self, mut f: impl FnMut(&StringRecord, u64) -> Result<()>) -> Result<()> {
        let mut record = StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(true) => {
                    let line = record.position().map_or(0, |p| p.line());
                    f(&record, line)?;
                }
                Ok(false) => return Ok(()),
                Err(e) => return Err(csv_error(&self.path, e)),
            }
        }
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        csv::ErrorKind::Utf8 { err, .. } => Error::Row {
            path: path.to_path_buf(),
            line,
            message: format!("invalid UTF-8: {err}"),
        },
        other => Error::Row { path: path.to_path_buf(), line, message: format!("{other:?}") },
    }
}

pub(crate) fn split_features(raw: &str, delim: &str, sentinels: &[&str]) -> Vec<String> {
    if raw.is_empty() || sentinels.contains(&raw) {
        return Vec::new();
    }
    dedup_features(raw.split(delim).map(str::to_owned).collect())
}

/// Parses MovieLens `ratings.csv` and `movies.csv`.
///
/// Genres are split on `|` and `(no genres listed)` gives an empty feature
/// list. Repeated (user, movie) ratings keep the latest by timestamp. Item
/// popularity is the number of ratings the movie received.
pub fn parse_movielens(ratings_path: impl AsRef<Path>, movies_path: impl AsRef<Path>) -> Result<Dataset> {
    let mut movies = Table::open(movies_path.as_ref(), b',', true)?;
    let (id_col, title_col, genres_col) =
        (movies.column("movieId")?, movies.column("title")?, movies.column("genres")?);
    let mut items: Vec<RawItem> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let path = movies.path().to_path_buf();
    movies.for_each(|rec, line| {
        let id = rec.get(id_col).unwrap_or_default().to_owned();
        if index.insert(id.clone(), items.len()).is_some() {
            return Err(Error::Row { path: path.clone(), line, message: format!("duplicate movieId {id}") });
        }
        let genres = split_features(rec.get(genres_col).unwrap_or_default(), "|", &[NO_GENRES]);
        items.push(RawItem::new(id, rec.get(title_col).unwrap_or_default(), genres, 0.0));
        Ok(())
    })?;

    let scale = FeedbackScale::movielens();
    let mut ratings = Table::open(ratings_path.as_ref(), b',', true)?;
    let cols = [
        ratings.column("userId")?,
        ratings.column("movieId")?,
        ratings.column("rating")?,
        ratings.column("timestamp")?,
    ];
    let mut rows = Vec::new();
    let path = ratings.path().to_path_buf();
    ratings.for_each(|rec, line| {
        let field = |i: usize| rec.get(cols[i]).unwrap_or_default();
        let row_err = |message: String| Error::Row { path: path.clone(), line, message };
        let rating: f64 =
            field(2).trim().parse().map_err(|_| row_err(format!("unparsable rating {:?}", field(2))))?;
        if !scale.contains(rating) {
            return Err(row_err(format!("rating {rating} outside [0.5, 5.0]")));
        }
        let timestamp: i64 =
            field(3).trim().parse().map_err(|_| row_err(format!("unparsable timestamp {:?}", field(3))))?;
        if !index.contains_key(field(1)) {
            return Err(row_err(format!("unknown movieId {}", field(1))));
        }
        rows.push(RawInteraction {
            user_id: field(0).to_owned(),
            item_id: field(1).to_owned(),
            feedback: rating,
            timestamp: Some(timestamp),
        });
        Ok(())
    })?;
    let interactions = dedup_latest(rows);
    count_popularity(&mut items, &interactions);
    Dataset::new(items, interactions, scale, SourceTag::MovieLens)
}

#[derive(Debug, Clone)]
pub struct ImdbOptions {
    /// `titleType` values to keep; empty keeps everything.
    pub title_types: Vec<String>,
}

impl Default for ImdbOptions {
    fn default() -> Self {
        ImdbOptions { title_types: vec!["movie".into()] }
    }
}

/// Parses IMDb `title.basics.tsv` and `title.ratings.tsv` with the default
/// `titleType` filter (`movie`).
pub fn parse_imdb(basics_path: impl AsRef<Path>, ratings_path: impl AsRef<Path>) -> Result<Dataset> {
    parse_imdb_with(basics_path, ratings_path, &ImdbOptions::default())
}

/// Inner join of the two IMDb dumps on `tconst`. The result has no
/// interactions; popularity is `numVotes` and `averageRating` is kept as
/// the item's mean feedback.
pub fn parse_imdb_with(
    basics_path: impl AsRef<Path>,
    ratings_path: impl AsRef<Path>,
    options: &ImdbOptions,
) -> Result<Dataset> {
    let mut ratings = Table::open(ratings_path.as_ref(), b'\t', false)?;
    let cols = [ratings.column("tconst")?, ratings.column("averageRating")?, ratings.column("numVotes")?];
    let mut votes: HashMap<String, (f64, Option<f64>)> = HashMap::new();
    let path = ratings.path().to_path_buf();
    ratings.for_each(|rec, line| {
        let field = |i: usize| rec.get(cols[i]).unwrap_or_default();
        let num_votes: u64 = field(2).trim().parse().map_err(|_| Error::Row {
            path: path.clone(),
            line,
            message: format!("malformed numVotes {:?}", field(2)),
        })?;
        let avg = match field(1) {
            IMDB_MISSING => None,
            s => Some(s.trim().parse::<f64>().map_err(|_| Error::Row {
                path: path.clone(),
                line,
                message: format!("malformed averageRating {s:?}"),
            })?),
        };
        votes.insert(field(0).to_owned(), (num_votes as f64, avg));
        Ok(())
    })?;

    let mut basics = Table::open(basics_path.as_ref(), b'\t', false)?;
    let bcols = [
        basics.column("tconst")?,
        basics.column("titleType")?,
        basics.column("primaryTitle")?,
        basics.column("genres")?,
    ];
    let mut items = Vec::new();
    let mut seen = std::collections::HashSet::new();
    basics.for_each(|rec, _line| {
        let field = |i: usize| rec.get(bcols[i]).unwrap_or_default();
        if !options.title_types.is_empty() && !options.title_types.iter().any(|t| t == field(1)) {
            return Ok(());
        }
        let Some(&(popularity, mean)) = votes.get(field(0)) else {
            return Ok(());
        };
        if !seen.insert(field(0).to_owned()) {
            return Ok(());
        }
        let mut item =
            RawItem::new(field(0), field(2), split_features(field(3), ",", &[IMDB_MISSING]), popularity);
        item.mean_feedback = mean;
        items.push(item);
        Ok(())
    })?;
    if items.is_empty() {
        return Err(Error::EmptyDataset { path: basics.path().to_path_buf() });
    }
    Dataset::new(items, Vec::new(), FeedbackScale::imdb(), SourceTag::Imdb)
}

/// Reads labeled examples (`example_id, label, payload...`; header row
/// required). Each distinct label becomes an item whose only feature is the
/// label; each example becomes a user giving feedback 1 to its label.
pub fn parse_classification(examples_path: impl AsRef<Path>) -> Result<Dataset> {
    let mut table = Table::open(examples_path.as_ref(), b',', true)?;
    if table.headers.len() < 2 {
        return Err(Error::Schema {
            path: table.path().to_path_buf(),
            message: "expected at least the columns example_id,label".into(),
        });
    }
    let mut items: Vec<RawItem> = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut rows = Vec::new();
    let path = table.path().to_path_buf();
    table.for_each(|rec, line| {
        let id = rec.get(0).unwrap_or_default();
        let label = rec.get(1).unwrap_or_default();
        if label.is_empty() {
            return Err(Error::Row { path: path.clone(), line, message: "empty label".into() });
        }
        let idx = *labels.entry(label.to_owned()).or_insert_with(|| {
            items.push(RawItem::new(label, label, vec![label.to_owned()], 0.0));
            items.len() - 1
        });
        items[idx].popularity += 1.0;
        rows.push(RawInteraction {
            user_id: id.to_owned(),
            item_id: label.to_owned(),
            feedback: 1.0,
            timestamp: None,
        });
        Ok(())
    })?;
    if items.is_empty() {
        return Err(Error::Schema { path, message: "no labels found".into() });
    }
    Dataset::new(items, rows, FeedbackScale::binary(), SourceTag::Classification)
}
