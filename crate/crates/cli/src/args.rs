use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "gtgbm", version, about = "Boosted trees with embedded feature selection")]
pub struct Cli {
    /// `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [env: GTGBM_OUT_DIR; default: gtgbm-out].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Threads used for split search. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fit a model and write it with a per-round log.
    Train(TrainArgs),
    /// Score rows with a saved model, one value per line.
    Predict(PredictArgs),
    /// Compute metrics for a saved model or a predictions file.
    Evaluate(EvaluateArgs),
    /// List the features a saved model selected, by gain.
    Select(SelectArgs),
    /// Run one of the experiment studies.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Plain,
    Gbfs,
    Agbm,
    Gtgbm,
    MultitaskAgbm,
    MultitaskGtgbm,
}

impl Mode {
    pub fn is_multitask(self) -> bool {
        matches!(self, Mode::MultitaskAgbm | Mode::MultitaskGtgbm)
    }

    pub fn uses_group_test(self) -> bool {
        matches!(self, Mode::Gtgbm | Mode::MultitaskGtgbm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Auto,
    Csv,
    Svmlight,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Data file(s); several comma-separated files form the tasks of a multitask run.
    #[arg(long, value_delimiter = ',')]
    pub data: Vec<PathBuf>,
    /// `auto` picks csv for `.csv` files and svmlight otherwise.
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    pub format: Format,
    /// Label column of csv input, by name or 0-based index.
    #[arg(long, default_value = "y")]
    pub target: String,
    /// Query/group id column of csv input.
    #[arg(long)]
    pub group: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoostArgs {
    #[arg(long, value_enum, default_value_t = Mode::Agbm)]
    pub mode: Mode,
    /// Penalty for a new feature.
    #[arg(long, default_value_t = 0.01)]
    pub mu: f64,
    /// Multitask penalty for a feature no task has used.
    #[arg(long, default_value_t = 0.01)]
    pub mu_group: f64,
    /// Multitask penalty for a feature this task has not used.
    #[arg(long, default_value_t = 0.01)]
    pub mu_task: f64,
    /// Shrinkage applied to every tree.
    #[arg(long, default_value_t = 0.1)]
    pub shrinkage: f64,
    /// Nodes with at most alpha * m samples become leaves.
    #[arg(long, default_value_t = 0.02)]
    pub alpha: f64,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    /// Desired feature count for group testing.
    #[arg(long)]
    pub s: Option<usize>,
    /// Failure probability for group testing.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub boost: BoostArgs,
    /// Model path [default: OUT_DIR/model.json].
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Task of a multitask model.
    #[arg(long, default_value_t = 0)]
    pub task: usize,
    /// Output path [default: OUT_DIR/predictions.csv].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Rmse,
    AucRoc,
    AucPr,
    Precision,
    Mrr,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Saved model; not needed with --predictions.
    #[arg(long, required_unless_present = "predictions")]
    pub model: Option<PathBuf>,
    /// Scores from `predict` instead of a model.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0)]
    pub task: usize,
    /// Metrics that must be defined; the run fails otherwise.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub metric: Vec<Metric>,
    /// Cutoffs for precision@k.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    /// Average precision@k per group instead of over the global ranking.
    #[arg(long)]
    pub grouped_precision: bool,
    /// Report path [default: OUT_DIR/eval.json].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub task: usize,
    /// Keep only the k highest-gain features.
    #[arg(long)]
    pub k: Option<usize>,
    /// Output path [default: OUT_DIR/selected_features.csv].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Root candidate-set success over a (d, n) grid of synthetic problems.
    PhaseGrid(PhaseGridArgs),
    /// Monte Carlo failure rate of isolating every active feature.
    Isolation(IsolationArgs),
    /// Exhaustive vs group-test split search: wall-clock and operation counts.
    Timing(TimingArgs),
    /// Train on all features, rank by gain, retrain on the top k.
    Topk(TopkArgs),
    /// Pearson matrix of a model's top-k features.
    Correlations(CorrelationArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseGridArgs {
    #[arg(long, value_delimiter = ',', default_value = "30,60,90,120,150")]
    pub d_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000,4000")]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the SVG heatmap.
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IsolationArgs {
    #[arg(long, default_value_t = 90)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, default_value_t = 5000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TimingArgs {
    /// Synthetic instance as `n=20000,d=500`; used when --data is absent.
    #[arg(long, default_value = "n=20000,d=500")]
    pub synthetic: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 10)]
    pub s: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.1)]
    pub shrinkage: f64,
    #[arg(long, default_value_t = 0.02)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TopkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub boost: BoostArgs,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelationArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0)]
    pub task: usize,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Output path [default: OUT_DIR/correlations.csv].
    #[arg(long)]
    pub output: Option<PathBuf>,
}
