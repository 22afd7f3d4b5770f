use std::fs;
use std::path::{Path, PathBuf};

use cbsim::agents::AgentSpec;
use cbsim::dataset::{
    parse_classification, parse_generic, parse_imdb_with, parse_movielens, write_generic, GenericSchema, ImdbOptions,
};
use cbsim::harness::{self, RunConfig};
use cbsim::plot::{bar_chart, Series};
use cbsim::presets::{build_preset, PresetName, PresetSpec, StateSource};
use cbsim::reward::{calibrate_alpha, feedback_histogram, reward_histogram, tv_distance, PairSampling};
use cbsim::synth::RatingSupport;
use cbsim::{BanditEnvironment, Dataset, Error, Result, RewardHistogram, RewardTransform, Sampler};

use crate::{AgentArgs, BuildEnvArgs, CalibrateArgs, CompareArgs, DatasetArgs, IngestArgs, InspectArgs, TrainArgs};

fn need<'a>(path: &'a Option<PathBuf>, flag: &str, format: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| Error::Config(format!("--{flag} is required for {format} data")))
}

fn has_files(args: &DatasetArgs) -> bool {
    [&args.ratings, &args.movies, &args.basics, &args.examples, &args.schema, &args.items, &args.interactions]
        .iter()
        .any(|p| p.is_some())
}

/// Parses the dataset named by `args`. `fallback` supplies the format when
/// `--format` is absent.
fn load_dataset(args: &DatasetArgs, fallback: Option<&str>) -> Result<Dataset> {
    let format = args
        .format
        .as_deref()
        .or(fallback)
        .ok_or_else(|| Error::Config("--format is required (movielens, imdb, classification or generic)".into()))?;
    match format {
        "movielens" => parse_movielens(need(&args.ratings, "ratings", format)?, need(&args.movies, "movies", format)?),
        "imdb" => {
            let mut options = ImdbOptions::default();
            if let Some(types) = &args.title_types {
                options.title_types = types.clone();
            }
            parse_imdb_with(need(&args.basics, "basics", format)?, need(&args.ratings, "ratings", format)?, &options)
        }
        "classification" => parse_classification(need(&args.examples, "examples", format)?),
        "generic" => {
            let schema = GenericSchema::load(need(&args.schema, "schema", format)?)?;
            parse_generic(args.interactions.as_deref(), need(&args.items, "items", format)?, &schema)
        }
        other => Err(Error::Config(format!(
            "unknown format {other:?}; expected movielens, imdb, classification or generic"
        ))),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn pair(values: &[f64], flag: &str) -> Result<(f64, f64)> {
    match values {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(Error::Config(format!("--{flag} needs LOW,HIGH with LOW < HIGH"))),
    }
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Config(format!("{what}: not a number: {s:?}")))
}

pub(crate) fn parse_transform(s: &str) -> Result<RewardTransform> {
    let t = match s.split_once(':') {
        None if s == "movielens" => RewardTransform::MovieLensClipRound,
        None if s == "imdb" => RewardTransform::ImdbSqrtRound,
        Some(("scaled", alpha)) => RewardTransform::ScaledCosine { alpha: parse_number(alpha, "alpha")? },
        Some(("affine", rest)) => {
            let parts: Vec<&str> = rest.split(',').collect();
            let [scale, offset, step, lo, hi] = parts[..] else {
                return Err(Error::Config("affine transform needs SCALE,OFFSET,STEP|none,LOW,HIGH".into()));
            };
            RewardTransform::AffineClip {
                scale: parse_number(scale, "scale")?,
                offset: parse_number(offset, "offset")?,
                round_step: if step == "none" { None } else { Some(parse_number(step, "step")?) },
                clip_low: parse_number(lo, "clip low")?,
                clip_high: parse_number(hi, "clip high")?,
            }
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown transform {s:?}; expected movielens, imdb, scaled:ALPHA or affine:..."
            )))
        }
    };
    t.validate()?;
    Ok(t)
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let mut ds = load_dataset(&args.data, None)?;
    if let Some(k) = args.top_users {
        ds = ds.top_k_users(k)?;
    }
    if let Some(k) = args.top_items {
        ds = ds.top_k_items(k);
    }
    let paths = write_generic(&ds, &args.out_dir)?;
    println!("items {}", ds.items().len());
    println!("interactions {}", ds.interactions().len());
    println!("users {}", ds.user_count());
    println!("schema {}", paths.schema.display());
    Ok(())
}

pub fn build_env(args: &BuildEnvArgs) -> Result<()> {
    let name = PresetName::parse(&args.preset)?;
    let dataset = load_dataset(&args.data, Some(name.as_str()))?;
    let mut spec = PresetSpec::by_name(name, args.seed);
    if let Some(k) = args.top_items {
        spec.top_items = Some(k);
    }
    if let Some(v) = &args.vocabulary {
        spec.vocabulary = Some(v.clone());
    }
    if let Some(n) = &args.norm {
        spec.normalization = pair(n, "norm")?;
    }
    if let Some(t) = &args.transform {
        spec.transform = parse_transform(t)?;
    }
    match &mut spec.states {
        StateSource::Users { top_users } => {
            if args.synth_users.is_some() || args.nonzero.is_some() || args.rating_dist.is_some() {
                return Err(Error::Config(format!("preset {} does not use synthetic users", name.as_str())));
            }
            if let Some(k) = args.top_users {
                *top_users = Some(k);
            }
        }
        StateSource::Synthetic { catalog_size, config } => {
            if args.top_users.is_some() {
                return Err(Error::Config("--top-users does not apply to synthetic users".into()));
            }
            if let Some(n) = args.catalog_size {
                *catalog_size = n;
            }
            if let Some(n) = args.synth_users {
                config.num_users = n;
            }
            if let Some(n) = args.nonzero {
                config.num_nonzero = n;
            }
            match args.rating_dist.as_deref() {
                None | Some("uniform") => {}
                Some("imdb_histogram") => config.support = RatingSupport::from_item_means(&dataset)?,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "unknown rating distribution {other:?}; expected uniform or imdb_histogram"
                    )))
                }
            }
        }
    }
    let sampler = match args.sampler.as_str() {
        "uniform" => Sampler::UniformIid { seed: args.seed },
        "round-robin" => Sampler::RoundRobin,
        other => return Err(Error::Config(format!("unknown sampler {other:?}; expected uniform or round-robin"))),
    };
    let (env, report) = build_preset(&dataset, &spec, sampler)?;
    env.save(&args.out)?;
    println!("states {}", env.num_states());
    println!("actions {}", env.num_actions());
    println!("features {}", env.dim());
    println!("transform {}", env.transform());
    if report.dropped_feature_tokens > 0 {
        eprintln!("warning: dropped {} feature tokens outside the vocabulary", report.dropped_feature_tokens);
    }
    if report.excluded_users > 0 {
        eprintln!("warning: excluded {} users with zero-vector states", report.excluded_users);
    }
    if report.zero_catalog_rows > 0 {
        eprintln!("warning: {} catalog items have no features", report.zero_catalog_rows);
    }
    Ok(())
}

fn env_histogram(env: &BanditEnvironment, sample: Option<usize>, seed: u64, bin_step: Option<f64>) -> Result<RewardHistogram> {
    let sampling = match sample {
        Some(n) => PairSampling::Sampled { n, seed },
        None => PairSampling::Exhaustive,
    };
    reward_histogram(env.states(), env.actions(), env.transform(), sampling, bin_step)
}

fn source_format(env: &BanditEnvironment) -> Option<&'static str> {
    env.provenance().source_tag.map(|t| t.as_str())
}

pub fn inspect(args: &InspectArgs) -> Result<()> {
    let env = BanditEnvironment::load(&args.env)?;
    let rewards = env_histogram(&env, args.sample, args.seed, args.bin_step)?;
    let dataset = if has_files(&args.data) {
        Some(feedback_histogram(&load_dataset(&args.data, source_format(&env))?)?)
    } else {
        None
    };
    let mut bins: Vec<f64> = rewards.bin_values().to_vec();
    if let Some(d) = &dataset {
        bins.extend_from_slice(d.bin_values());
    }
    bins.sort_by(f64::total_cmp);
    bins.dedup();
    let mut csv = String::new();
    let mut series = Vec::new();
    match &dataset {
        Some(d) => {
            csv.push_str("value,dataset_count,env_count\n");
            for &v in &bins {
                csv.push_str(&format!("{v},{},{}\n", d.count_of(v), rewards.count_of(v)));
            }
            series.push(Series {
                label: "dataset".into(),
                values: bins.iter().map(|&v| d.count_of(v) as f64 / d.total() as f64).collect(),
            });
        }
        None => {
            csv.push_str("value,env_count\n");
            for &v in &bins {
                csv.push_str(&format!("{v},{}\n", rewards.count_of(v)));
            }
        }
    }
    series.push(Series {
        label: "environment".into(),
        values: bins.iter().map(|&v| rewards.count_of(v) as f64 / rewards.total() as f64).collect(),
    });
    if let Some(path) = &args.out_csv {
        write(path, &csv)?;
    } else {
        print!("{csv}");
    }
    if let Some(path) = &args.out_plot {
        write(path, bar_chart(&bins, &series, "Reward distribution", "value", "frequency"))?;
    }
    if let Some(d) = &dataset {
        println!("tv_distance {}", tv_distance(d, &rewards)?);
    }
    Ok(())
}

pub fn calibrate(args: &CalibrateArgs) -> Result<()> {
    let env = BanditEnvironment::load(&args.env)?;
    let (target, scale) = match &args.target {
        Some(path) => (RewardHistogram::read_csv(path)?, None),
        None => {
            if !has_files(&args.data) {
                return Err(Error::Config("calibrate needs --target or dataset files".into()));
            }
            let ds = load_dataset(&args.data, source_format(&env))?;
            (feedback_histogram(&ds)?, Some(ds.scale()))
        }
    };
    let clip = match (&args.clip, scale) {
        (Some(c), _) => pair(c, "clip")?,
        (None, Some(s)) => (s.min(), s.max()),
        (None, None) => {
            let bins = target.bin_values();
            (bins[0], bins[bins.len() - 1])
        }
    };
    let step = args
        .round_step
        .or(scale.and_then(|s| s.step()))
        .ok_or_else(|| Error::Config("--round-step is required when the target scale is not discrete".into()))?;
    let cal = calibrate_alpha(env.states(), env.actions(), &target, &args.grid, step, clip)?;
    if let Some(path) = &args.out {
        let mut csv = String::from("alpha,tv_distance\n");
        for (a, d) in &cal.curve {
            csv.push_str(&format!("{a},{d}\n"));
        }
        write(path, csv)?;
    }
    println!("alpha {}", cal.alpha);
    println!("tv_distance {}", cal.distance);
    Ok(())
}

fn agent_spec(name: &str, hyper: &AgentArgs) -> Result<AgentSpec> {
    let mut spec = AgentSpec::from_name(name)?;
    match &mut spec {
        AgentSpec::EpsilonGreedy { epsilon } => {
            if let Some(e) = hyper.epsilon {
                *epsilon = e;
            }
        }
        AgentSpec::LinUcb { beta, ridge, normalize } => {
            if let Some(b) = hyper.beta {
                *beta = b;
            }
            if let Some(r) = hyper.ridge {
                *ridge = r;
            }
            *normalize = !hyper.no_normalize;
        }
        AgentSpec::Softmax { learning_rate, normalize } => {
            if let Some(l) = hyper.learning_rate {
                *learning_rate = l;
            }
            *normalize = !hyper.no_normalize;
        }
        AgentSpec::Uniform | AgentSpec::Oracle => {}
    }
    Ok(spec)
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let env = BanditEnvironment::load(&args.env)?;
    let config = RunConfig {
        num_steps: args.steps,
        seed: args.seed,
        agent: agent_spec(&args.agent, &args.hyper)?,
        moving_average_window: args.window,
    };
    let metrics = harness::run(&env, &config)?;
    if let Some(path) = &args.out {
        harness::export_csv(&metrics, path)?;
    }
    if let Some(path) = &args.plot {
        let series = [Series { label: metrics.agent.clone(), values: harness::moving_average(&metrics.reward_series, args.window)? }];
        harness::export_plot(&series, "Training reward (moving average)", path)?;
    }
    let s = metrics.summary;
    println!("agent {}", config.agent);
    println!("mean_reward {}", s.mean_reward_overall);
    println!("mean_reward_last_window {}", s.mean_reward_last_window);
    println!("total_regret {}", s.total_regret);
    Ok(())
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let env = BanditEnvironment::load(&args.env)?;
    let configs = args
        .agents
        .iter()
        .map(|name| {
            Ok(RunConfig {
                num_steps: args.steps,
                seed: args.seed,
                agent: agent_spec(name, &args.hyper)?,
                moving_average_window: args.window,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = harness::compare(&env, &configs, args.repeats)?;
    if let Some(path) = &args.out {
        harness::export_table_csv(&table, path)?;
    }
    if let Some(path) = &args.plot {
        harness::export_plot(&table.curves, "Training reward (moving average)", path)?;
    }
    print!("{}", harness::table_csv(&table));
    Ok(())
}
