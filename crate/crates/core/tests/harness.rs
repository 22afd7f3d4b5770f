mod common;

use std::fs;

use cbsim::agents::AgentSpec;
use cbsim::harness::{
    compare, export_csv, export_plot, metrics_csv, moving_average, run, table_csv, RunConfig, RunMetrics,
    METRICS_HEADER, TABLE_HEADER,
};
use cbsim::plot::Series;

use common::movielens_env;

fn spec(name: &str) -> AgentSpec {
    AgentSpec::from_name(name).unwrap()
}

#[test]
fn oracle_has_zero_regret() {
    let env = movielens_env();
    let m = run(&env, &RunConfig::new(AgentSpec::Oracle, 2000, 4)).unwrap();
    assert_eq!(m.summary.total_regret, 0.0);
    assert!(m.regret_series.iter().all(|&g| g == 0.0));
    assert_eq!(m.reward_series, m.best_reward_series);
}

#[test]
fn uniform_matches_exhaustive_mean() {
    let env = movielens_env();
    // every (state, action) pair, scored one at a time
    let mut all = Vec::new();
    for s in 0..env.num_states() {
        for a in 0..env.num_actions() {
            all.push(env.step(s, a).unwrap());
        }
    }
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / all.len() as f64;
    let n = 1000;
    let m = run(&env, &RunConfig::new(AgentSpec::Uniform, n, 0)).unwrap();
    let se = (var / n as f64).sqrt();
    let got = m.summary.mean_reward_overall;
    assert!((got - mean).abs() <= 3.0 * se, "uniform mean {got}, exhaustive {mean}, se {se}");
}

#[test]
fn runs_are_deterministic() {
    let env = movielens_env();
    for name in ["uniform", "egreedy", "linucb", "softmax", "oracle"] {
        let cfg = RunConfig::new(spec(name), 1500, 77);
        assert_eq!(run(&env, &cfg).unwrap(), run(&env, &cfg).unwrap(), "{name}");
    }
}

#[test]
fn different_seeds_see_different_states() {
    let env = movielens_env();
    let a = run(&env, &RunConfig::new(AgentSpec::Oracle, 200, 1)).unwrap();
    let b = run(&env, &RunConfig::new(AgentSpec::Oracle, 200, 2)).unwrap();
    let states = |m: &RunMetrics| m.interactions.iter().map(|i| i.state_index).collect::<Vec<_>>();
    assert_ne!(states(&a), states(&b));
}

#[test]
fn summary_is_recomputable() {
    let env = movielens_env();
    for name in ["uniform", "egreedy", "linucb", "softmax"] {
        let mut cfg = RunConfig::new(spec(name), 3000, 5);
        cfg.moving_average_window = 700;
        let m = run(&env, &cfg).unwrap();
        assert_eq!(m.reward_series.len(), 3000);
        assert_eq!(m.regret_series.len(), 3000);
        assert_eq!(m.interactions.len(), 3000);
        let mean = m.reward_series.iter().sum::<f64>() / 3000.0;
        assert!((m.summary.mean_reward_overall - mean).abs() < 1e-12);
        let last = m.reward_series[2300..].iter().sum::<f64>() / 700.0;
        assert!((m.summary.mean_reward_last_window - last).abs() < 1e-12);
        assert_eq!(m.summary.total_regret, *m.regret_series.last().unwrap());
        assert!(m.regret_series.windows(2).all(|w| w[0] <= w[1]), "{name}");

        let received: f64 = m.reward_series.iter().sum();
        let best: f64 = m.best_reward_series.iter().sum();
        assert!((received + m.summary.total_regret - best).abs() < 1e-9, "{name}");
        for (i, x) in m.interactions.iter().enumerate() {
            assert_eq!(x.step_index, i);
            assert_eq!(x.reward, m.reward_series[i]);
            assert_eq!(env.best_action(x.state_index).unwrap().1, m.best_reward_series[i]);
        }
    }
}

#[test]
fn config_validation() {
    let env = movielens_env();
    let mut cfg = RunConfig::new(AgentSpec::Uniform, 10, 0);
    cfg.moving_average_window = 11;
    assert!(run(&env, &cfg).is_err());
    cfg.moving_average_window = 0;
    assert!(run(&env, &cfg).is_err());
    assert!(run(&env, &RunConfig { num_steps: 0, moving_average_window: 1, ..cfg }).is_err());
    assert!(compare(&env, &[], 3).is_err());
    assert!(compare(&env, &[RunConfig::new(AgentSpec::Uniform, 10, 0)], 0).is_err());
}

#[test]
fn moving_average_examples() {
    assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), vec![1.0, 1.5, 2.5, 3.5]);
    let xs = [3.0, -1.0, 7.5, 0.25, 2.0];
    assert_eq!(moving_average(&xs, 1).unwrap(), xs.to_vec());
    let running = moving_average(&xs, xs.len()).unwrap();
    assert_eq!(running, vec![3.0, 1.0, 9.5 / 3.0, 9.75 / 4.0, 11.75 / 5.0]);
    // a window longer than the series stays expanding
    assert_eq!(moving_average(&xs, 50).unwrap(), running);
    assert!(moving_average(&[], 3).is_err());
    assert!(moving_average(&xs, 0).is_err());
}

#[test]
fn csv_round_trip() {
    let env = movielens_env();
    let m = run(&env, &RunConfig::new(spec("egreedy"), 800, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics.csv");
    export_csv(&m, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(METRICS_HEADER));
    let ma = moving_average(&m.reward_series, m.window).unwrap();
    let mut n = 0;
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 4);
        assert_eq!(f[0].parse::<usize>().unwrap(), i);
        assert_eq!(f[1].parse::<f64>().unwrap(), m.reward_series[i]);
        assert_eq!(f[2].parse::<f64>().unwrap(), ma[i]);
        assert_eq!(f[3].parse::<f64>().unwrap(), m.regret_series[i]);
        n += 1;
    }
    assert_eq!(n, 800);
}

#[test]
fn empty_metrics_give_header_only() {
    assert_eq!(metrics_csv(&RunMetrics::default()).unwrap(), format!("{METRICS_HEADER}\n"));
}

#[test]
fn plot_has_one_polyline_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.svg");
    let series = vec![
        Series { label: "a".into(), values: vec![1.0, 2.0, 3.0] },
        Series { label: "b".into(), values: vec![3.0, 1.0, 2.0] },
    ];
    export_plot(&series, "Rewards", &path).unwrap();
    let svg = fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">step<") && svg.contains(">reward<"));
}

#[test]
fn compare_single_repeat_has_zero_spread() {
    let env = movielens_env();
    let configs = [RunConfig::new(AgentSpec::Uniform, 500, 8), RunConfig::new(AgentSpec::Oracle, 500, 8)];
    let table = compare(&env, &configs, 1).unwrap();
    for row in &table.rows {
        assert_eq!(row.repeats, 1);
        assert_eq!(row.mean_reward.std, 0.0);
        assert_eq!(row.last_window_reward.std, 0.0);
        assert_eq!(row.total_regret.std, 0.0);
    }
}

#[test]
fn compare_oracle_dominates_uniform() {
    let env = movielens_env();
    let configs = [RunConfig::new(AgentSpec::Uniform, 1000, 2), RunConfig::new(AgentSpec::Oracle, 1000, 2)];
    let table = compare(&env, &configs, 4).unwrap();
    let (u, o) = (&table.rows[0], &table.rows[1]);
    assert_eq!((u.agent.as_str(), o.agent.as_str()), ("uniform", "oracle"));
    assert!(o.mean_reward.mean >= u.mean_reward.mean);
    assert_eq!(o.total_regret.mean, 0.0);
    assert_eq!(table.curves.len(), 2);
    assert_eq!(table.curves[1].values.len(), 1000);
}

#[test]
fn compare_matches_individual_runs() {
    let env = movielens_env();
    let configs = [RunConfig::new(spec("linucb"), 600, 13), RunConfig::new(spec("softmax"), 600, 13)];
    let table = compare(&env, &configs, 3).unwrap();
    assert_eq!(table, compare(&env, &configs, 3).unwrap());
    for (cfg, row) in configs.iter().zip(&table.rows) {
        let mut by_hand = Vec::new();
        for r in 0..3u64 {
            let seeded = RunConfig { seed: cbsim::rng::derive_seed(cfg.seed, r), ..cfg.clone() };
            by_hand.push(run(&env, &seeded).unwrap().summary);
        }
        assert_eq!(row.runs, by_hand);
        let mean = by_hand.iter().map(|s| s.mean_reward_overall).sum::<f64>() / 3.0;
        assert!((row.mean_reward.mean - mean).abs() < 1e-12);
        let var = by_hand.iter().map(|s| (s.mean_reward_overall - mean).powi(2)).sum::<f64>() / 2.0;
        assert!((row.mean_reward.std - var.sqrt()).abs() < 1e-12);
    }
    let csv = table_csv(&table);
    assert_eq!(csv.lines().next(), Some(TABLE_HEADER));
    assert_eq!(csv.lines().count(), 3);
}
