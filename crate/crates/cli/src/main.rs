//! `cbsim`: build contextual bandit environments from recommendation data
//! and train agents against them.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data or file
//! format error, 4 internal invariant violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cbsim::ErrorClass;

#[derive(Parser)]
#[command(name = "cbsim", version, about = "Contextual bandit environments from recommendation datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dataset and write it in the generic CSV layout
    Ingest(IngestArgs),
    /// Build an environment file (.cbe)
    BuildEnv(BuildEnvArgs),
    /// Reward histogram of an environment, optionally against its source data
    Inspect(InspectArgs),
    /// Choose the cosine scale that best matches a feedback histogram
    Calibrate(CalibrateArgs),
    /// Run one agent and export its learning curve
    Train(TrainArgs),
    /// Run several agents over repeated seeds and tabulate them
    Compare(CompareArgs),
}

/// Source dataset files. Which ones are needed depends on `--format`.
#[derive(Args, Clone, Default)]
pub struct DatasetArgs {
    /// movielens, imdb, classification or generic
    #[arg(long)]
    pub format: Option<String>,
    /// MovieLens ratings.csv, or IMDb title.ratings.tsv
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// MovieLens movies.csv
    #[arg(long)]
    pub movies: Option<PathBuf>,
    /// IMDb title.basics.tsv
    #[arg(long)]
    pub basics: Option<PathBuf>,
    /// IMDb title types to keep, comma separated
    #[arg(long, value_delimiter = ',')]
    pub title_types: Option<Vec<String>>,
    /// Labeled examples CSV (example_id,label,...)
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// Generic schema file
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Generic items file
    #[arg(long)]
    pub items: Option<PathBuf>,
    /// Generic interactions file
    #[arg(long)]
    pub interactions: Option<PathBuf>,
}

#[derive(Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Keep only the most popular items
    #[arg(long)]
    pub top_items: Option<usize>,
    /// Keep only the most active users
    #[arg(long)]
    pub top_users: Option<usize>,
    /// Output directory for items.csv, interactions.csv and schema.cfg
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct BuildEnvArgs {
    /// movielens, imdb, classification or generic
    #[arg(long)]
    pub preset: String,
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub top_items: Option<usize>,
    #[arg(long)]
    pub top_users: Option<usize>,
    /// Synthetic catalog size (imdb)
    #[arg(long)]
    pub catalog_size: Option<usize>,
    /// Number of synthetic users (imdb)
    #[arg(long)]
    pub synth_users: Option<usize>,
    /// Ratings per synthetic user (imdb)
    #[arg(long)]
    pub nonzero: Option<usize>,
    /// Synthetic rating distribution: uniform or imdb_histogram
    #[arg(long)]
    pub rating_dist: Option<String>,
    /// Feedback normalization interval, LOW,HIGH
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub norm: Option<Vec<f64>>,
    /// movielens, imdb, scaled:ALPHA or affine:SCALE,OFFSET,STEP|none,LOW,HIGH
    #[arg(long, allow_hyphen_values = true)]
    pub transform: Option<String>,
    /// Feature vocabulary, comma separated (overrides the preset list)
    #[arg(long, value_delimiter = ',')]
    pub vocabulary: Option<Vec<String>>,
    /// State sampler: uniform or round-robin
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    /// Seed for synthetic users and the state sampler
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Histogram bin width for continuous rewards
    #[arg(long)]
    pub bin_step: Option<f64>,
    /// Sample this many (state, action) pairs instead of all of them
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram CSV output
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Histogram SVG output
    #[arg(long)]
    pub out_plot: Option<PathBuf>,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Environment whose states and actions are used
    #[arg(long, alias = "env-parts")]
    pub env: PathBuf,
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Target histogram CSV (value,count) instead of a dataset
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,5,10")]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub round_step: Option<f64>,
    /// LOW,HIGH (defaults to the target's scale)
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub clip: Option<Vec<f64>>,
    /// Distance curve CSV (alpha,tv_distance)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct AgentArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Feed raw (not unit-length) states to linucb and softmax
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// uniform, egreedy, linucb, softmax or oracle
    #[arg(long)]
    pub agent: String,
    #[command(flatten)]
    pub hyper: AgentArgs,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-step metrics CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Learning curve SVG
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Comma separated agent names
    #[arg(long, value_delimiter = ',', default_value = "uniform,egreedy,linucb,softmax,oracle")]
    pub agents: Vec<String>,
    #[command(flatten)]
    pub hyper: AgentArgs,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Agent table CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Moving-average reward curves SVG
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::BuildEnv(a) => commands::build_env(&a),
        Command::Inspect(a) => commands::inspect(&a),
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Compare(a) => commands::compare(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Internal => 4,
            })
        }
    }
}
