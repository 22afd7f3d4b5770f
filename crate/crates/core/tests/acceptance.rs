//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cbsim::agents::{AgentSpec, AGENT_NAMES};
use cbsim::dataset::parse_classification;
use cbsim::harness::{compare, run, RunConfig};
use cbsim::presets::{build_preset, PresetSpec, StateSource, IMDB_GENRES, MOVIELENS_GENRES};
use cbsim::reward::{calibrate_alpha, cosine, feedback_histogram, reward, reward_histogram, tv_distance, PairSampling};
use cbsim::rng::SimRng;
use cbsim::synth::simulate_feedback;
use cbsim::{BanditEnvironment, Error, RewardTransform, Sampler};

use common::oracle;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration, what: &str) -> std::result::Result<Duration, String> {
    let t = start.elapsed();
    if t < limit {
        Ok(t)
    } else {
        Err(format!("{what} took {t:.2?}, limit {limit:?}"))
    }
}

fn half_stars() -> Vec<f64> {
    (1..=10).map(|k| k as f64 * 0.5).collect()
}

fn exhaustive_rewards(env: &BanditEnvironment) -> Vec<f64> {
    let mut out = Vec::with_capacity(env.num_states() * env.num_actions());
    for s in 0..env.num_states() {
        for a in 0..env.num_actions() {
            out.push(env.step(s, a).unwrap());
        }
    }
    out
}

fn movielens_structure() -> Outcome {
    let start = Instant::now();
    let (r, m) = common::movielens_paths();
    let ds = cbsim::dataset::parse_movielens(&r, &m).map_err(|e| e.to_string())?;
    let (env, _) =
        build_preset(&ds, &PresetSpec::movielens(), Sampler::UniformIid { seed: 0 }).map_err(|e| e.to_string())?;
    let t = within(start, Duration::from_secs(5), "parse + build")?;
    let expected_actions = 100.min(ds.items().len());
    ensure!(env.num_actions() == expected_actions, "|A| = {}, expected {expected_actions}", env.num_actions());
    ensure!(env.dim() == 18 && env.states().dim() == 18, "dimension {}", env.dim());
    let levels = half_stars();
    let rewards = exhaustive_rewards(&env);
    ensure!(rewards.iter().all(|r| levels.contains(r)), "reward outside the half-star set");
    Ok(format!(
        "{} items x {} users fixture: |A| = {}, d = 18, {} rewards in {{0.5..5}}, {t:.2?}",
        ds.items().len(),
        ds.user_count(),
        env.num_actions(),
        rewards.len()
    ))
}

fn imdb_spec(users: usize, seed: u64) -> PresetSpec {
    let mut spec = PresetSpec::imdb(seed);
    if let StateSource::Synthetic { config, .. } = &mut spec.states {
        config.num_users = users;
    }
    spec
}

fn imdb_structure() -> Outcome {
    let start = Instant::now();
    let ds = common::imdb();
    let spec = imdb_spec(1000, 3);
    let (env, report) = build_preset(&ds, &spec, Sampler::UniformIid { seed: 3 }).map_err(|e| e.to_string())?;
    let t = within(start, Duration::from_secs(10), "parse + build")?;
    ensure!(env.dim() == 27, "dimension {}", env.dim());
    let StateSource::Synthetic { catalog_size, config } = &spec.states else { unreachable!() };
    let catalog = ds.retain_features(&spec.vocabulary.clone().unwrap()).0.top_k_items(*catalog_size).items().len();
    let feedback = simulate_feedback(catalog, config).map_err(|e| e.to_string())?;
    ensure!(feedback.len() == 1000, "{} synthetic users", feedback.len());
    for (u, fb) in feedback.iter().enumerate() {
        let mut idx = fb.indices.clone();
        idx.dedup();
        ensure!(idx.len() == 50 && fb.values.iter().all(|&v| v != 0.0), "user {u} has {} distinct entries", idx.len());
    }
    ensure!(
        env.num_states() + report.excluded_users == 1000,
        "{} states + {} excluded",
        env.num_states(),
        report.excluded_users
    );
    let rewards = exhaustive_rewards(&env);
    ensure!(rewards.iter().all(|r| (1..=10).any(|k| k as f64 == *r)), "reward outside {{1..10}}");
    ensure!(env.transform().apply(-1.0) == 1.0, "c = -1 maps to {}", env.transform().apply(-1.0));
    Ok(format!("d = 27, 1000 users x 50 distinct ratings, rewards in {{1..10}}, c = -1 -> 1, {t:.2?}"))
}

fn transform_points() -> Outcome {
    let ml = RewardTransform::MovieLensClipRound;
    let got: Vec<f64> = [-1.0, 0.0, 1.0].iter().map(|&c| ml.apply(c)).collect();
    ensure!(got == [0.5, 1.0, 5.0], "movielens {got:?}");
    let im = RewardTransform::ImdbSqrtRound;
    let got: Vec<f64> = [0.0, 1.0].iter().map(|&c| im.apply(c)).collect();
    ensure!(got == [8.0, 10.0], "imdb {got:?}");
    Ok("movielens {-1,0,1} -> {0.5,1,5}; imdb {0,1} -> {8,10}".into())
}

fn state_oracle() -> Outcome {
    let (r, m) = common::movielens_paths();
    let expected = oracle::movielens_states(&r, &m, &MOVIELENS_GENRES, 10_000, 100);
    let env = common::movielens_env();
    ensure!(env.num_states() == expected.len(), "{} states vs {} expected", env.num_states(), expected.len());
    let mut worst: f64 = 0.0;
    for (i, user) in env.states().user_ids().iter().enumerate() {
        let want = expected.get(user).ok_or_else(|| format!("unexpected user {user}"))?;
        worst = worst.max(oracle::max_abs_diff(env.states().row(i), want));
    }
    ensure!(worst <= 1e-12, "movielens max |diff| {worst:e}");

    let ds = common::imdb();
    let spec = imdb_spec(500, 21);
    let (env, _) = build_preset(&ds, &spec, Sampler::RoundRobin).map_err(|e| e.to_string())?;
    let StateSource::Synthetic { catalog_size, config } = &spec.states else { unreachable!() };
    let top = ds.retain_features(&spec.vocabulary.clone().unwrap()).0.top_k_items(*catalog_size);
    let rows: Vec<Vec<f64>> = top
        .items()
        .iter()
        .map(|it| IMDB_GENRES.iter().map(|g| if it.features.iter().any(|f| f == g) { 1.0 } else { 0.0 }).collect())
        .collect();
    let feedback = simulate_feedback(rows.len(), config).map_err(|e| e.to_string())?;
    let mut k = 0;
    let mut worst_imdb: f64 = 0.0;
    for fb in &feedback {
        let want = oracle::sparse_state(&rows, &fb.indices, &fb.values, (1.0, 10.0), (-1.0, 1.0));
        if want.iter().all(|&v| v == 0.0) {
            continue;
        }
        ensure!(k < env.num_states(), "fewer states than nonzero users");
        worst_imdb = worst_imdb.max(oracle::max_abs_diff(env.states().row(k), &want));
        k += 1;
    }
    ensure!(k == env.num_states(), "{k} nonzero users vs {} states", env.num_states());
    ensure!(worst_imdb <= 1e-12, "imdb max |diff| {worst_imdb:e}");
    Ok(format!("max |diff| movielens {worst:e}, imdb {worst_imdb:e} (tolerance 1e-12)"))
}

fn invariances() -> Outcome {
    let mut checked = 0;
    for env in [common::movielens_env(), common::imdb_env(200, 8)] {
        let t = *env.transform();
        for s in 0..env.num_states() {
            let state = env.states().row(s);
            for a in 0..env.num_actions() {
                let action = env.actions().row(a);
                let base = reward(state, action, &t).unwrap();
                let c1 = cosine(state, action).unwrap();
                let c2 = cosine(action, state).unwrap();
                ensure!(c1.to_bits() == c2.to_bits(), "cosine asymmetric at ({s},{a})");
                for c in [1e-3, 0.5, 2.0, 1e3] {
                    let scaled: Vec<f64> = state.iter().map(|v| v * c).collect();
                    let r = reward(&scaled, action, &t).unwrap();
                    ensure!((r - base).abs() <= 1e-9, "scale {c} at ({s},{a}): {r} vs {base}");
                }
                checked += 1;
            }
        }
    }
    let grid: Vec<f64> = (0..=10_000).map(|i| -1.0 + i as f64 / 5000.0).collect();
    let transforms = [
        RewardTransform::MovieLensClipRound,
        RewardTransform::ImdbSqrtRound,
        RewardTransform::ScaledCosine { alpha: 3.0 },
        RewardTransform::AffineClip { scale: 10.0, offset: 0.0, round_step: Some(0.5), clip_low: 0.5, clip_high: 5.0 },
    ];
    for t in transforms {
        let values: Vec<f64> = grid.iter().map(|&c| t.apply(c)).collect();
        ensure!(values.windows(2).all(|w| w[0] <= w[1]), "{} is not monotone on the grid", t.name());
    }
    Ok(format!("{checked} fixture pairs scale-invariant (1e-9) and symmetric; 4 transforms monotone on 10,001 points"))
}

fn regret_identities() -> Outcome {
    let env = common::movielens_env();
    let steps = 20_000;
    let oracle_run = run(&env, &RunConfig::new(AgentSpec::Oracle, steps, 6)).map_err(|e| e.to_string())?;
    ensure!(oracle_run.summary.total_regret == 0.0, "oracle regret {}", oracle_run.summary.total_regret);
    let oracle_states: Vec<usize> = oracle_run.interactions.iter().map(|i| i.state_index).collect();
    let oracle_total: f64 = oracle_run.reward_series.iter().sum();
    let mut worst: f64 = 0.0;
    for name in AGENT_NAMES {
        let m = run(&env, &RunConfig::new(AgentSpec::from_name(name).unwrap(), steps, 6)).map_err(|e| e.to_string())?;
        let states: Vec<usize> = m.interactions.iter().map(|i| i.state_index).collect();
        ensure!(states == oracle_states, "{name} saw a different state sequence");
        let received: f64 = m.reward_series.iter().sum();
        let gap = (received + m.summary.total_regret - oracle_total).abs();
        worst = worst.max(gap);
        ensure!(gap <= 1e-9, "{name}: |sum reward + regret - sum oracle| = {gap:e}");
    }
    Ok(format!("oracle regret 0; identity holds for all 5 agents over 20,000 steps (max gap {worst:e})"))
}

fn learning_signal() -> Outcome {
    let start = Instant::now();
    let env = common::movielens_env();
    let configs: Vec<RunConfig> = ["linucb", "uniform"]
        .iter()
        .map(|n| RunConfig { moving_average_window: 1000, ..RunConfig::new(AgentSpec::from_name(n).unwrap(), 20_000, 1) })
        .collect();
    let table = compare(&env, &configs, 5).map_err(|e| e.to_string())?;
    let t = within(start, Duration::from_secs(30), "5 repeats x 2 agents")?;
    let (lin, uni) = (&table.rows[0], &table.rows[1]);
    let mut ratios = Vec::new();
    for (k, (l, u)) in lin.runs.iter().zip(&uni.runs).enumerate() {
        let ratio = l.mean_reward_last_window / u.mean_reward_last_window;
        ensure!(ratio >= 1.15, "repeat {k}: linucb {:.3} vs uniform {:.3}", l.mean_reward_last_window, u.mean_reward_last_window);
        ratios.push(ratio);
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "last-1000 mean linucb {:.3} vs uniform {:.3}; min per-repeat ratio {min:.3} >= 1.15; {t:.2?}",
        lin.last_window_reward.mean, uni.last_window_reward.mean
    ))
}

fn distribution_fidelity() -> Outcome {
    let ds = common::movielens();
    let env = common::movielens_env();
    let data = feedback_histogram(&ds).map_err(|e| e.to_string())?;
    let sim = reward_histogram(env.states(), env.actions(), env.transform(), PairSampling::Exhaustive, None)
        .map_err(|e| e.to_string())?;
    let tv = tv_distance(&data, &sim).map_err(|e| e.to_string())?;
    ensure!(tv.is_finite() && tv < 0.30, "TV {tv}");
    let grid = [0.5, 1.0, 2.0, 3.0, 5.0, 10.0];
    for planted in [2.0, 5.0] {
        let t = RewardTransform::AffineClip { scale: planted, offset: 0.0, round_step: Some(0.5), clip_low: 0.5, clip_high: 5.0 };
        let target = reward_histogram(env.states(), env.actions(), &t, PairSampling::Exhaustive, None).unwrap();
        let cal = calibrate_alpha(env.states(), env.actions(), &target, &grid, 0.5, (0.5, 5.0)).map_err(|e| e.to_string())?;
        ensure!(cal.alpha == planted && cal.distance == 0.0, "planted {planted}, recovered {} at {}", cal.alpha, cal.distance);
    }
    Ok(format!("TV(dataset, env) = {tv:.4} < 0.30; planted alpha 2 and 5 recovered exactly"))
}

fn serialization() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let env = common::movielens_env();
    let path = dir.path().join("movielens.cbe");
    env.save(&path).map_err(|e| e.to_string())?;
    let back = BanditEnvironment::load(&path).map_err(|e| e.to_string())?;
    let mut rng = SimRng::new(2024);
    for _ in 0..1000 {
        let (s, a) = (rng.index(env.num_states()), rng.index(env.num_actions()));
        ensure!(env.step(s, a).unwrap().to_bits() == back.step(s, a).unwrap().to_bits(), "reward differs at ({s},{a})");
    }
    let mut bytes = std::fs::read(&path).unwrap();
    let k = bytes.len() / 2;
    bytes[k] = if bytes[k] == b'0' { b'1' } else { b'0' };
    ensure!(
        matches!(BanditEnvironment::from_file_bytes(&bytes), Err(Error::Checksum { .. })),
        "corrupted file was not rejected by checksum"
    );
    Ok("1000 random pairs bit-identical after reload; corrupted file rejected".into())
}

fn classification() -> Outcome {
    let ds = parse_classification(common::fixture("classification/toy.csv")).map_err(|e| e.to_string())?;
    let (env, _) = build_preset(&ds, &PresetSpec::classification(), Sampler::UniformIid { seed: 0 })
        .map_err(|e| e.to_string())?;
    let rewards = exhaustive_rewards(&env);
    ensure!(rewards.iter().all(|&r| r == 0.0 || r == 1.0), "non-binary reward");
    let m = run(&env, &RunConfig::new(AgentSpec::Oracle, 2000, 0)).map_err(|e| e.to_string())?;
    ensure!(m.summary.mean_reward_overall == 1.0, "oracle mean {}", m.summary.mean_reward_overall);
    Ok(format!("{} examples x {} labels, rewards in {{0,1}}, oracle mean 1.0", env.num_states(), env.num_actions()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("movielens preset structure", movielens_structure),
        ("imdb preset structure", imdb_structure),
        ("transform point values", transform_points),
        ("state encoding matches brute force", state_oracle),
        ("cosine reward invariances", invariances),
        ("oracle and regret identities", regret_identities),
        ("learning signal", learning_signal),
        ("distribution fidelity", distribution_fidelity),
        ("serialization", serialization),
        ("classification adapter", classification),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
