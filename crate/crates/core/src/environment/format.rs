//! Text container for environments (`.cbe`).
//!
//! UTF-8, `\n` line endings, one record per line:
//!
//! ```text
//! CBSIM-ENV
//! format_version 1
//! [metadata]
//! rng splitmix64
//! source_tag movielens            (optional)
//! preset movielens                (optional)
//! synth.num_users 10000           (optional synth block, all five keys)
//! synth.num_nonzero 50
//! synth.seed 7
//! synth.support_values 1 2 ... 10
//! synth.support_probabilities 0.1 ... 0.1
//! note.<key> <value>              (zero or more, sorted by key)
//! [vocabulary] <T>
//! <feature>                       (T lines)
//! [actions] <A> <T>
//! <item_id>\t<title>\t<v_1> ... <v_T>
//! [states] <S> <T> <norm_low> <norm_high>
//! <user_id>\t<v_1> ... <v_T>
//! [transform]
//! kind <name>
//! <parameter> <value>             (alpha | scale offset round_step clip_low clip_high)
//! [sampler]
//! kind uniform_iid | round_robin
//! seed <u64>                      (uniform_iid only)
//! [end]
//! sha256 <64 lowercase hex digits>
//! ```
//!
//! Numbers use the shortest decimal that parses back to the same IEEE-754
//! binary64 value, so payloads round-trip bit-for-bit. Text fields escape
//! `\\`, tab, `\n` and `\r` as `\\\\`, `\\t`, `\\n`, `\\r`. The checksum is
//! the SHA-256 of every byte before the `sha256` line. Writing is
//! canonical: loading a file and saving it again reproduces it exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{BanditEnvironment, Provenance, Sampler};
use crate::dataset::SourceTag;
use crate::encoder::{ActionSet, FeatureVocabulary, StateSet};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::reward::RewardTransform;
use crate::rng;
use crate::synth::{RatingSupport, SynthConfig};

pub const MAGIC: &str = "CBSIM-ENV";
pub const FORMAT_VERSION: u32 = 1;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(Error::Format(format!("bad escape \\{}", other.map(String::from).unwrap_or_default()))),
        }
    }
    Ok(out)
}

fn join_numbers(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v}").expect("write to String");
    }
    out
}

impl BanditEnvironment {
    /// Serializes the environment in the canonical `.cbe` text form.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(MAGIC.into());
        line(format!("format_version {FORMAT_VERSION}"));
        line("[metadata]".into());
        line(format!("rng {}", rng::ALGORITHM));
        let p = &self.provenance;
        if let Some(tag) = p.source_tag {
            line(format!("source_tag {tag}"));
        }
        if let Some(preset) = &p.preset {
            line(format!("preset {}", escape(preset)));
        }
        if let Some(synth) = &p.synth {
            line(format!("synth.num_users {}", synth.num_users));
            line(format!("synth.num_nonzero {}", synth.num_nonzero));
            line(format!("synth.seed {}", synth.seed));
            line(format!("synth.support_values {}", join_numbers(synth.support.values())));
            line(format!("synth.support_probabilities {}", join_numbers(synth.support.probabilities())));
        }
        for (k, v) in &p.notes {
            line(format!("note.{} {}", escape(k).replace(' ', "\\u0020"), escape(v)));
        }

        let vocab = self.actions.vocabulary();
        line(format!("[vocabulary] {}", vocab.len()));
        for f in vocab.features() {
            line(escape(f));
        }
        line(format!("[actions] {} {}", self.actions.len(), self.actions.dim()));
        for i in 0..self.actions.len() {
            line(format!(
                "{}\t{}\t{}",
                escape(&self.actions.item_ids()[i]),
                escape(&self.actions.titles()[i]),
                join_numbers(self.actions.row(i))
            ));
        }
        let (lo, hi) = self.states.norm_range();
        line(format!("[states] {} {} {lo} {hi}", self.states.len(), self.states.dim()));
        for i in 0..self.states.len() {
            line(format!("{}\t{}", escape(&self.states.user_ids()[i]), join_numbers(self.states.row(i))));
        }
        line("[transform]".into());
        line(format!("kind {}", self.transform.name()));
        match self.transform {
            RewardTransform::ScaledCosine { alpha } => line(format!("alpha {alpha}")),
            RewardTransform::AffineClip { scale, offset, round_step, clip_low, clip_high } => {
                line(format!("scale {scale}"));
                line(format!("offset {offset}"));
                line(format!("round_step {}", round_step.map_or("none".to_string(), |s| s.to_string())));
                line(format!("clip_low {clip_low}"));
                line(format!("clip_high {clip_high}"));
            }
            RewardTransform::MovieLensClipRound | RewardTransform::ImdbSqrtRound => {}
        }
        line("[sampler]".into());
        match self.sampler {
            Sampler::UniformIid { seed } => {
                line("kind uniform_iid".into());
                line(format!("seed {seed}"));
            }
            Sampler::RoundRobin => line("kind round_robin".into()),
        }
        line("[end]".into());
        let digest = hex(&Sha256::digest(out.as_bytes()));
        out.push_str(&format!("sha256 {digest}\n"));
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_file_bytes(&bytes)
    }

    /// Parses a `.cbe` file, verifying the checksum before anything else.
    pub fn from_file_bytes(bytes: &[u8]) -> Result<Self> {
        let body_end = find_checksum_line(bytes)?;
        let trailer = std::str::from_utf8(&bytes[body_end..])
            .map_err(|_| Error::Format("checksum line is not UTF-8".into()))?;
        let expected = trailer
            .strip_prefix("sha256 ")
            .and_then(|s| s.strip_suffix('\n'))
            .ok_or_else(|| Error::Format("malformed checksum line".into()))?;
        let found = hex(&Sha256::digest(&bytes[..body_end]));
        if expected != found {
            return Err(Error::Checksum { expected: expected.into(), found });
        }
        let body = std::str::from_utf8(&bytes[..body_end]).map_err(|_| Error::Format("body is not UTF-8".into()))?;
        Parser { lines: body.lines().enumerate().peekable() }.environment()
    }
}

fn find_checksum_line(bytes: &[u8]) -> Result<usize> {
    let truncated = || Error::Format("truncated file: no checksum line".into());
    if !bytes.ends_with(b"\n") {
        return Err(truncated());
    }
    let last_start = bytes[..bytes.len() - 1].iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if !bytes[last_start..].starts_with(b"sha256 ") {
        return Err(truncated());
    }
    Ok(last_start)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        write!(s, "{b:02x}").expect("write to String");
        s
    })
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Parser<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.lines
            .next()
            .map(|(n, l)| (n + 1, l))
            .ok_or_else(|| Error::Format("unexpected end of file".into()))
    }

    fn err(line: usize, msg: impl std::fmt::Display) -> Error {
        Error::Format(format!("line {line}: {msg}"))
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let (n, l) = self.next()?;
        if l != want {
            return Err(Self::err(n, format!("expected {want:?}, found {l:?}")));
        }
        Ok(())
    }

    /// Reads `<key> <value>` and checks the key.
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.next()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v)),
            _ => Err(Self::err(n, format!("expected {key:?}, found {l:?}"))),
        }
    }

    fn section(&mut self, name: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, l) = self.next()?;
        let mut parts = l.split(' ');
        if parts.next() != Some(name) {
            return Err(Self::err(n, format!("expected section {name}, found {l:?}")));
        }
        Ok((n, parts.collect()))
    }

    fn environment(mut self) -> Result<BanditEnvironment> {
        self.expect(MAGIC)?;
        let (n, version) = self.field("format_version")?;
        if version != FORMAT_VERSION.to_string() {
            let _ = n;
            return Err(Error::Version(version.into()));
        }
        self.expect("[metadata]")?;
        let (n, algo) = self.field("rng")?;
        if algo != rng::ALGORITHM {
            return Err(Self::err(n, format!("unsupported rng {algo:?}")));
        }
        let mut provenance = Provenance::default();
        let mut synth: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        while let Some(&(_, l)) = self.lines.peek() {
            if l.starts_with('[') {
                break;
            }
            let (n, l) = self.next()?;
            let (k, v) = l.split_once(' ').ok_or_else(|| Self::err(n, "expected key and value"))?;
            match k {
                "source_tag" => {
                    provenance.source_tag =
                        Some(SourceTag::parse(v).ok_or_else(|| Self::err(n, format!("unknown source tag {v:?}")))?)
                }
                "preset" => provenance.preset = Some(unescape(v)?),
                _ if k.starts_with("synth.") => {
                    synth.insert(&k["synth.".len()..], (n, v));
                }
                _ if k.starts_with("note.") => {
                    let key = unescape(&k["note.".len()..].replace("\\u0020", " "))?;
                    provenance.notes.insert(key, unescape(v)?);
                }
                _ => return Err(Self::err(n, format!("unknown metadata key {k:?}"))),
            }
        }
        if !synth.is_empty() {
            provenance.synth = Some(synth_config(&synth)?);
        }

        let (n, args) = self.section("[vocabulary]")?;
        let count = parse_usize(n, args.first().copied())?;
        let mut features = Vec::with_capacity(count);
        for _ in 0..count {
            features.push(unescape(self.next()?.1)?);
        }
        let vocabulary = FeatureVocabulary::new(features)?;

        let (n, args) = self.section("[actions]")?;
        let (rows, cols) = (parse_usize(n, args.first().copied())?, parse_usize(n, args.get(1).copied())?);
        if cols != vocabulary.len() {
            return Err(Self::err(n, "action width differs from vocabulary size"));
        }
        let mut ids = Vec::with_capacity(rows);
        let mut titles = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (n, l) = self.next()?;
            let mut parts = l.splitn(3, '\t');
            let (id, title, nums) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(Self::err(n, "expected id, title and values")),
            };
            ids.push(unescape(id)?);
            titles.push(unescape(title)?);
            data.push(parse_row(n, nums, cols)?);
        }
        let matrix = Matrix::from_rows(cols, data).map_err(|_| Self::err(n, "ragged action rows"))?;
        let actions = ActionSet::from_parts(vocabulary, matrix, ids, titles)?;

        let (n, args) = self.section("[states]")?;
        let rows = parse_usize(n, args.first().copied())?;
        let cols = parse_usize(n, args.get(1).copied())?;
        let lo = parse_f64(n, args.get(2).copied())?;
        let hi = parse_f64(n, args.get(3).copied())?;
        let mut users = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (n, l) = self.next()?;
            let (id, nums) = l.split_once('\t').ok_or_else(|| Self::err(n, "expected id and values"))?;
            users.push(unescape(id)?);
            data.push(parse_row(n, nums, cols)?);
        }
        let matrix = Matrix::from_rows(cols, data).map_err(|_| Self::err(n, "ragged state rows"))?;
        let states = StateSet::from_parts(matrix, users, (lo, hi))?;

        self.expect("[transform]")?;
        let (n, kind) = self.field("kind")?;
        let transform = match kind {
            "scaled_cosine" => {
                let (n, v) = self.field("alpha")?;
                RewardTransform::ScaledCosine { alpha: parse_f64(n, Some(v))? }
            }
            "movielens_clip_round" => RewardTransform::MovieLensClipRound,
            "imdb_sqrt_round" => RewardTransform::ImdbSqrtRound,
            "affine_clip" => {
                let mut num = |key: &str| -> Result<f64> {
                    let (n, v) = self.field(key)?;
                    parse_f64(n, Some(v))
                };
                let scale = num("scale")?;
                let offset = num("offset")?;
                let (n, step) = self.field("round_step")?;
                let round_step = if step == "none" { None } else { Some(parse_f64(n, Some(step))?) };
                let clip_low = {
                    let (n, v) = self.field("clip_low")?;
                    parse_f64(n, Some(v))?
                };
                let clip_high = {
                    let (n, v) = self.field("clip_high")?;
                    parse_f64(n, Some(v))?
                };
                RewardTransform::AffineClip { scale, offset, round_step, clip_low, clip_high }
            }
            other => return Err(Self::err(n, format!("unknown transform {other:?}"))),
        };

        self.expect("[sampler]")?;
        let (n, kind) = self.field("kind")?;
        let sampler = match kind {
            "uniform_iid" => {
                let (n, v) = self.field("seed")?;
                Sampler::UniformIid { seed: v.parse().map_err(|_| Self::err(n, format!("bad seed {v:?}")))? }
            }
            "round_robin" => Sampler::RoundRobin,
            other => return Err(Self::err(n, format!("unknown sampler {other:?}"))),
        };
        self.expect("[end]")?;
        if let Some((n, _)) = self.lines.next() {
            return Err(Self::err(n + 1, "content after [end]"));
        }
        BanditEnvironment::build(states, actions, transform, sampler, provenance)
    }
}

fn parse_usize(line: usize, v: Option<&str>) -> Result<usize> {
    v.and_then(|s| s.parse().ok()).ok_or_else(|| Parser::err(line, format!("expected a count, found {v:?}")))
}

fn parse_f64(line: usize, v: Option<&str>) -> Result<f64> {
    v.and_then(|s| s.parse::<f64>().ok())
        .filter(|x| x.is_finite())
        .ok_or_else(|| Parser::err(line, format!("expected a number, found {v:?}")))
}

fn parse_row(line: usize, s: &str, cols: usize) -> Result<Vec<f64>> {
    let row = if s.is_empty() {
        Vec::new()
    } else {
        s.split(' ').map(|v| parse_f64(line, Some(v))).collect::<Result<Vec<_>>>()?
    };
    if row.len() != cols {
        return Err(Parser::err(line, format!("expected {cols} values, found {}", row.len())));
    }
    Ok(row)
}

fn synth_config(fields: &BTreeMap<&str, (usize, &str)>) -> Result<SynthConfig> {
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Format(format!("missing synth.{k}")));
    let int = |k: &str| -> Result<u64> {
        let (n, v) = get(k)?;
        v.parse().map_err(|_| Parser::err(n, format!("bad synth.{k} {v:?}")))
    };
    let list = |k: &str| -> Result<Vec<f64>> {
        let (n, v) = get(k)?;
        v.split(' ').map(|x| parse_f64(n, Some(x))).collect()
    };
    if fields.len() != 5 {
        return Err(Error::Format("synth block needs exactly five keys".into()));
    }
    Ok(SynthConfig {
        num_users: int("num_users")? as usize,
        num_nonzero: int("num_nonzero")? as usize,
        seed: int("seed")?,
        support: RatingSupport::new(list("support_values")?, list("support_probabilities")?)?,
    })
}
