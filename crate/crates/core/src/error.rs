use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading, validating or reshaping data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    Parse { line: usize, column: String, value: String },
    #[error("line {line}, column {column}: non-finite value {value:?}")]
    NonFinite { line: usize, column: String, value: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Svmlight { line: usize, message: String },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("dataset has no samples")]
    Empty,
    #[error("split fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("need at least {needed} samples (or groups), found {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("synthetic data needs d >= 3, got d = {0}")]
    TooFewFeatures(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Invalid hyperparameters or incompatible configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("A-GBM penalty mu must lie in [0, 1], got {0}")]
    AgbmMuRange(f64),
    #[error("penalty must be non-negative and finite, got {0}")]
    NegativePenalty(f64),
    #[error("multitask penalties need mu_group + mu_task < 1, got {mu_group} + {mu_task}")]
    MultitaskPenaltySum { mu_group: f64, mu_task: f64 },
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("desired feature count s must be at least 1")]
    ZeroS,
    #[error("shrinkage must lie in (0, 1], got {0}")]
    Shrinkage(f64),
    #[error("alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
    #[error("group-test splitter requires a group-test configuration")]
    MissingGtConfig,
    #[error("{0}")]
    Invalid(String),
}

/// Failures while reading or writing model files.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("unsupported model format version {found} (this build reads version {supported})")]
    Version { found: u64, supported: u64 },
}

/// Metric inputs that leave the metric undefined.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {0} predictions for {1} targets")]
    LengthMismatch(usize, usize),
    #[error("no samples to evaluate")]
    Empty,
    #[error("labels must be 0 or 1, found {0}")]
    NonBinaryLabel(f64),
    #[error("both classes must be present")]
    SingleClass,
    #[error("no positive labels")]
    NoPositives,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {0} exceeds the size of every group")]
    KTooLarge(usize),
    #[error("metric needs group ids")]
    MissingGroups,
    #[error("feature {0} is constant")]
    ConstantFeature(usize),
    #[error("feature {0} out of range")]
    FeatureOutOfRange(usize),
}

/// Top-level error for training and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
