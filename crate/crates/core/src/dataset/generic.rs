//! Column-mapped CSV/TSV input and the matching writer.
//!
//! The schema is a flat `key = value` file (`#` starts a comment):
//!
//! ```text
//! user_col = userId
//! item_col = movieId
//! feedback_col = rating
//! feature_col = genres
//! feature_delim = |
//! scale_min = 0.5
//! scale_max = 5.0
//! scale_step = 0.5
//! ```
//!
//! Optional keys: `title_col`, `timestamp_col`, `popularity_col`,
//! `mean_feedback_col`, `delimiter` (single character, `\t` accepted),
//! `quoting` (`true`/`false`), `no_features_token`, `missing_token` and
//! `source_tag`. When `popularity_col` is absent, popularity is the item's
//! interaction count.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use super::parse::{split_features, Table};
use super::{count_popularity, dedup_latest, Dataset, FeedbackScale, RawInteraction, RawItem, SourceTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GenericSchema {
    pub user_col: Option<String>,
    pub item_col: String,
    pub feedback_col: Option<String>,
    pub feature_col: String,
    pub feature_delim: String,
    pub scale: FeedbackScale,
    pub title_col: Option<String>,
    pub timestamp_col: Option<String>,
    pub popularity_col: Option<String>,
    pub mean_feedback_col: Option<String>,
    pub delimiter: u8,
    pub quoting: bool,
    pub no_features_token: Option<String>,
    pub missing_token: Option<String>,
    pub source_tag: SourceTag,
    origin: PathBuf,
}

const KEYS: &[&str] = &[
    "user_col",
    "item_col",
    "feedback_col",
    "feature_col",
    "feature_delim",
    "scale_min",
    "scale_max",
    "scale_step",
    "title_col",
    "timestamp_col",
    "popularity_col",
    "mean_feedback_col",
    "delimiter",
    "quoting",
    "no_features_token",
    "missing_token",
    "source_tag",
];

fn unescape(v: &str) -> String {
    match v {
        "\\t" | "tab" => "\t".into(),
        _ => v.into(),
    }
}

impl GenericSchema {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses schema text; `origin` only labels error messages.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref().to_path_buf();
        let err = |message: String| Error::Schema { path: origin.clone(), message };
        let mut map: BTreeMap<&str, String> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(err(format!("line {}: unknown key {k:?}", n + 1)));
            }
            map.insert(k, unescape(v.trim()));
        }
        let required = |k: &str| map.get(k).cloned().ok_or_else(|| err(format!("missing key {k:?}")));
        let number = |k: &str| -> Result<Option<f64>> {
            map.get(k)
                .map(|v| v.parse::<f64>().map_err(|_| err(format!("{k}: not a number: {v:?}"))))
                .transpose()
        };
        let feature_delim = required("feature_delim")?;
        if feature_delim.is_empty() {
            return Err(err("feature_delim must not be empty".into()));
        }
        let delimiter = match map.get("delimiter").map(String::as_str) {
            None => b',',
            Some(d) if d.len() == 1 => d.as_bytes()[0],
            Some(d) => return Err(err(format!("delimiter must be a single byte, got {d:?}"))),
        };
        let quoting = match map.get("quoting").map(String::as_str) {
            None | Some("true") => true,
            Some("false") => false,
            Some(v) => return Err(err(format!("quoting must be true or false, got {v:?}"))),
        };
        let source_tag = match map.get("source_tag") {
            None => SourceTag::Generic,
            Some(v) => SourceTag::parse(v).ok_or_else(|| err(format!("unknown source_tag {v:?}")))?,
        };
        let scale_min = number("scale_min")?.ok_or_else(|| err("missing key \"scale_min\"".into()))?;
        let scale_max = number("scale_max")?.ok_or_else(|| err("missing key \"scale_max\"".into()))?;
        let scale = FeedbackScale::new(scale_min, scale_max, number("scale_step")?).map_err(|e| err(e.to_string()))?;
        Ok(GenericSchema {
            user_col: map.get("user_col").cloned(),
            item_col: required("item_col")?,
            feedback_col: map.get("feedback_col").cloned(),
            feature_col: required("feature_col")?,
            feature_delim,
            scale,
            title_col: map.get("title_col").cloned(),
            timestamp_col: map.get("timestamp_col").cloned(),
            popularity_col: map.get("popularity_col").cloned(),
            mean_feedback_col: map.get("mean_feedback_col").cloned(),
            delimiter,
            quoting,
            no_features_token: map.get("no_features_token").cloned(),
            missing_token: map.get("missing_token").cloned(),
            source_tag,
            origin,
        })
    }

    /// Renders the schema in the config format accepted by [`GenericSchema::parse`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: &str| {
            let v = if v == "\t" { "\\t" } else { v };
            out.push_str(&format!("{k} = {v}\n"));
        };
        if let Some(v) = &self.user_col {
            put("user_col", v);
        }
        put("item_col", &self.item_col);
        if let Some(v) = &self.feedback_col {
            put("feedback_col", v);
        }
        put("feature_col", &self.feature_col);
        put("feature_delim", &self.feature_delim);
        put("scale_min", &self.scale.min().to_string());
        put("scale_max", &self.scale.max().to_string());
        if let Some(step) = self.scale.step() {
            put("scale_step", &step.to_string());
        }
        for (k, v) in [
            ("title_col", &self.title_col),
            ("timestamp_col", &self.timestamp_col),
            ("popularity_col", &self.popularity_col),
            ("mean_feedback_col", &self.mean_feedback_col),
            ("no_features_token", &self.no_features_token),
            ("missing_token", &self.missing_token),
        ] {
            if let Some(v) = v {
                put(k, v);
            }
        }
        put("delimiter", &(self.delimiter as char).to_string());
        put("quoting", if self.quoting { "true" } else { "false" });
        put("source_tag", self.source_tag.as_str());
        out
    }

    fn schema_error(&self, message: String) -> Error {
        Error::Schema { path: self.origin.clone(), message }
    }

    fn is_missing(&self, v: &str) -> bool {
        v.is_empty() || self.missing_token.as_deref() == Some(v)
    }

    /// Parses an items file and an optional interactions file.
    pub fn read(&self, interactions_path: Option<&Path>, items_path: &Path) -> Result<Dataset> {
        let mut table = Table::open(items_path, self.delimiter, self.quoting)?;
        let id_col = table.column(&self.item_col)?;
        let feat_col = table.column(&self.feature_col)?;
        let title_col = self.title_col.as_deref().map(|c| table.column(c)).transpose()?;
        let pop_col = self.popularity_col.as_deref().map(|c| table.column(c)).transpose()?;
        let mean_col = self.mean_feedback_col.as_deref().map(|c| table.column(c)).transpose()?;
        let mut sentinels: Vec<&str> = Vec::new();
        sentinels.extend(self.no_features_token.as_deref());
        sentinels.extend(self.missing_token.as_deref());

        let path = items_path.to_path_buf();
        let mut items: Vec<RawItem> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        table.for_each(|rec, line| {
            let row_err = |message: String| Error::Row { path: path.clone(), line, message };
            let get = |c: usize| rec.get(c).unwrap_or_default();
            let id = get(id_col).to_owned();
            if index.insert(id.clone(), items.len()).is_some() {
                return Err(row_err(format!("duplicate item id {id:?}")));
            }
            let title = title_col.map_or(id.as_str(), get).to_owned();
            let features = split_features(get(feat_col), &self.feature_delim, &sentinels);
            let mut item = RawItem::new(id.clone(), title, features, 0.0);
            if let Some(c) = pop_col {
                item.popularity = get(c)
                    .trim()
                    .parse()
                    .map_err(|_| row_err(format!("malformed popularity {:?}", get(c))))?;
            }
            if let Some(c) = mean_col {
                let v = get(c);
                if !self.is_missing(v) {
                    item.mean_feedback =
                        Some(v.trim().parse().map_err(|_| row_err(format!("malformed mean feedback {v:?}")))?);
                }
            }
            items.push(item);
            Ok(())
        })?;

        let mut rows = Vec::new();
        if let Some(ipath) = interactions_path {
            let user_col = self.user_col.as_deref().ok_or_else(|| self.schema_error("missing key \"user_col\"".into()))?;
            let fb_col =
                self.feedback_col.as_deref().ok_or_else(|| self.schema_error("missing key \"feedback_col\"".into()))?;
            let mut table = Table::open(ipath, self.delimiter, self.quoting)?;
            let (u, i, f) = (table.column(user_col)?, table.column(&self.item_col)?, table.column(fb_col)?);
            let ts = self.timestamp_col.as_deref().map(|c| table.column(c)).transpose()?;
            let path = ipath.to_path_buf();
            let scale = self.scale;
            table.for_each(|rec, line| {
                let row_err = |message: String| Error::Row { path: path.clone(), line, message };
                let get = |c: usize| rec.get(c).unwrap_or_default();
                let feedback: f64 =
                    get(f).trim().parse().map_err(|_| row_err(format!("unparsable feedback {:?}", get(f))))?;
                if !scale.contains(feedback) {
                    return Err(row_err(format!(
                        "feedback {feedback} outside [{}, {}]",
                        scale.min(),
                        scale.max()
                    )));
                }
                let timestamp = match ts.map(get) {
                    Some(v) if !self.is_missing(v) => {
                        Some(v.trim().parse().map_err(|_| row_err(format!("unparsable timestamp {v:?}")))?)
                    }
                    _ => None,
                };
                if !index.contains_key(get(i)) {
                    return Err(row_err(format!("unknown item {:?}", get(i))));
                }
                rows.push(RawInteraction {
                    user_id: get(u).to_owned(),
                    item_id: get(i).to_owned(),
                    feedback,
                    timestamp,
                });
                Ok(())
            })?;
        }
        let interactions = dedup_latest(rows);
        if pop_col.is_none() {
            count_popularity(&mut items, &interactions);
        }
        Dataset::new(items, interactions, self.scale, self.source_tag)
    }
}

/// Parses a dataset through a column-mapping schema. Pass `None` for
/// `interactions_path` to read an items-only catalog.
pub fn parse_generic(
    interactions_path: Option<&Path>,
    items_path: &Path,
    schema: &GenericSchema,
) -> Result<Dataset> {
    schema.read(interactions_path, items_path)
}

#[derive(Debug, Clone)]
pub struct GenericPaths {
    pub items: PathBuf,
    pub interactions: PathBuf,
    pub schema: PathBuf,
}

/// Writes `dataset` as `items.csv`, `interactions.csv` and `schema.cfg`
/// under `dir`. Re-parsing those files yields an equal dataset.
pub fn write_generic(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<GenericPaths> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = GenericPaths {
        items: dir.join("items.csv"),
        interactions: dir.join("interactions.csv"),
        schema: dir.join("schema.cfg"),
    };
    let delim = "|";
    if let Some(bad) = dataset.items().iter().flat_map(|i| &i.features).find(|f| f.contains(delim)) {
        return Err(Error::Config(format!("feature {bad:?} contains the delimiter {delim:?}")));
    }

    let write_err = |path: &Path, e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(&paths.items).map_err(|e| write_err(&paths.items, e))?;
    w.write_record(["item_id", "title", "features", "popularity", "mean_feedback"])
        .map_err(|e| write_err(&paths.items, e))?;
    for item in dataset.items() {
        let mean = item.mean_feedback.map(|m| m.to_string()).unwrap_or_default();
        w.write_record([
            item.item_id.as_str(),
            item.title.as_str(),
            &item.features.join(delim),
            &item.popularity.to_string(),
            &mean,
        ])
        .map_err(|e| write_err(&paths.items, e))?;
    }
    w.flush().map_err(|e| Error::io(&paths.items, e))?;

    let mut w = csv::Writer::from_path(&paths.interactions).map_err(|e| write_err(&paths.interactions, e))?;
    w.write_record(["user_id", "item_id", "feedback", "timestamp"])
        .map_err(|e| write_err(&paths.interactions, e))?;
    for it in dataset.interactions() {
        let ts = it.timestamp.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([it.user_id.as_str(), it.item_id.as_str(), &it.feedback.to_string(), &ts])
            .map_err(|e| write_err(&paths.interactions, e))?;
    }
    w.flush().map_err(|e| Error::io(&paths.interactions, e))?;

    let schema = GenericSchema {
        user_col: Some("user_id".into()),
        item_col: "item_id".into(),
        feedback_col: Some("feedback".into()),
        feature_col: "features".into(),
        feature_delim: delim.into(),
        scale: dataset.scale(),
        title_col: Some("title".into()),
        timestamp_col: Some("timestamp".into()),
        popularity_col: Some("popularity".into()),
        mean_feedback_col: Some("mean_feedback".into()),
        delimiter: b',',
        quoting: true,
        no_features_token: None,
        missing_token: None,
        source_tag: dataset.source_tag(),
        origin: paths.schema.clone(),
    };
    fs::write(&paths.schema, schema.to_config_string()).map_err(|e| Error::io(&paths.schema, e))?;
    Ok(paths)
}
