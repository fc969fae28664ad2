//! Gradient-boosted regression trees with embedded forward feature
//! selection: GBFS, A-GBM, group-testing split search (GT-GBM) and
//! multitask boosting with shared feature sets.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod boosting;
pub mod counters;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod grouptest;
pub mod metrics;
pub mod scalar;
pub mod seed;
pub mod splitcore;
pub mod tree;

pub use boosting::{
    fit, fit_logged, fit_multitask, fit_multitask_logged, load_model, load_multitask_model, predict, save_model,
    save_multitask_model, BoostConfig, BoostedModel, MultitaskModel, RoundLog, SplitterKind,
};
pub use counters::{CounterSnapshot, OpCounters};
pub use dataset::{
    generate_synthetic, load_csv, load_csv_features, load_svmlight, standardize, train_valid_split, ColumnRef,
    FeatureMatrix, LabeledDataset, StandardizationParams, SyntheticSpec, TaskBundle,
};
pub use error::{ConfigError, DataError, Error, MetricError, ModelError, Result};
pub use grouptest::{make_subset_plan, num_subsets, GtConfig, SubsetPlan};
pub use metrics::EvalReport;
pub use scalar::Scalar;
pub use splitcore::{best_split_exhaustive, CriterionMode, FeatureUsageSets, NodeSplit, SplitCriterionConfig};
pub use tree::{fit_tree, FittedTree, RegressionTree, Splitter, TreeNode, TreeParams};

pub type Dataset = LabeledDataset<f64>;
pub type Matrix = FeatureMatrix<f64>;
pub type Model = BoostedModel<f64>;
pub type Multitask = MultitaskModel<f64>;
pub type Tasks = TaskBundle<f64>;
pub type Tree = RegressionTree<f64>;
