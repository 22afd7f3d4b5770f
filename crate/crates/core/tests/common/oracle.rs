//! Independent reference computations. Nothing here calls into the
//! library's parsing or encoding code.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

/// MovieLens preset states recomputed from the raw files: latest rating
/// per (user, movie), top `top_users` users and top `top_items` movies by
/// rating count over the whole file (ties by numeric id), ratings mapped onto `[0, 1]` and
/// summed over the one-hot genre rows of the kept movies.
pub fn movielens_states(
    ratings: &Path,
    movies: &Path,
    genres: &[&str],
    top_users: usize,
    top_items: usize,
) -> BTreeMap<String, Vec<f64>> {
    let mut genre_rows: HashMap<String, Vec<f64>> = HashMap::new();
    for line in fs::read_to_string(movies).unwrap().lines().skip(1) {
        let id = line.split(',').next().unwrap().to_string();
        let tags = line.rsplit(',').next().unwrap();
        let row = genres.iter().map(|g| if tags.split('|').any(|t| t == *g) { 1.0 } else { 0.0 }).collect();
        genre_rows.insert(id, row);
    }
    // (user, movie) -> (timestamp, file position, rating)
    let mut latest: HashMap<(String, String), (i64, usize, f64)> = HashMap::new();
    for (pos, line) in fs::read_to_string(ratings).unwrap().lines().skip(1).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let key = (f[0].to_string(), f[1].to_string());
        let entry = (f[3].parse::<i64>().unwrap(), pos, f[2].parse::<f64>().unwrap());
        match latest.get(&key) {
            Some(prev) if (prev.0, prev.1) > (entry.0, entry.1) => {}
            _ => {
                latest.insert(key, entry);
            }
        }
    }
    let rank = |counts: HashMap<String, usize>, k: usize| -> HashSet<String> {
        let mut v: Vec<(String, usize)> = counts.into_iter().collect();
        v.sort_by(|a, b| {
            b.1.cmp(&a.1).then_with(|| a.0.parse::<u64>().unwrap().cmp(&b.0.parse::<u64>().unwrap()))
        });
        v.into_iter().take(k).map(|(id, _)| id).collect()
    };
    let mut user_counts: HashMap<String, usize> = HashMap::new();
    for (u, _) in latest.keys() {
        *user_counts.entry(u.clone()).or_default() += 1;
    }
    let users = rank(user_counts, top_users);
    let mut movie_counts: HashMap<String, usize> = HashMap::new();
    for (_, m) in latest.keys() {
        *movie_counts.entry(m.clone()).or_default() += 1;
    }
    let kept = rank(movie_counts, top_items);
    let mut states: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for ((u, m), (_, _, r)) in &latest {
        if !users.contains(u) || !kept.contains(m) {
            continue;
        }
        let f = (r - 0.5) / 4.5;
        let s = states.entry(u.clone()).or_insert_with(|| vec![0.0; genres.len()]);
        for (sj, aj) in s.iter_mut().zip(&genre_rows[m]) {
            *sj += f * aj;
        }
    }
    states.retain(|_, s| s.iter().any(|&v| v != 0.0));
    states
}

/// One state as a plain double loop over (item, feature).
pub fn sparse_state(catalog: &[Vec<f64>], indices: &[usize], values: &[f64], scale: (f64, f64), target: (f64, f64)) -> Vec<f64> {
    let dim = catalog[0].len();
    let mut s = vec![0.0; dim];
    for (&i, &v) in indices.iter().zip(values) {
        let f = target.0 + (v - scale.0) * (target.1 - target.0) / (scale.1 - scale.0);
        for j in 0..dim {
            s[j] += f * catalog[i][j];
        }
    }
    s
}

/// Cosine by a scalar loop with no shared helpers.
pub fn cosine(s: &[f64], a: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut ss = 0.0;
    let mut aa = 0.0;
    for j in 0..s.len() {
        dot += s[j] * a[j];
        ss += s[j] * s[j];
        aa += a[j] * a[j];
    }
    (dot / (ss.sqrt() * aa.sqrt())).clamp(-1.0, 1.0)
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
