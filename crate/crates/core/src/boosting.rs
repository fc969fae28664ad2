//! Boosting loops, inference and model files.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::counters::OpCounters;
use crate::dataset::{FeatureMatrix, LabeledDataset, StandardizationParams, TaskBundle};
use crate::error::{ConfigError, DataError, Error, ModelError};
use crate::grouptest::GtConfig;
use crate::scalar::Scalar;
use crate::seed::tree_seed;
use crate::splitcore::{CriterionMode, FeatureUsageSets, SplitCriterionConfig};
use crate::tree::{fit_tree, presort_columns, RegressionTree, Splitter, TreeNode, TreeParams};

/// Version written by [`save_model`]; readers reject anything else.
pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitterKind {
    Exhaustive,
    GroupTest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub iterations: usize,
    pub shrinkage: f64,
    pub alpha: f64,
    pub criterion: SplitCriterionConfig,
    pub splitter: SplitterKind,
    /// Required by the group-test splitter. Its `seed` is ignored: tree `k`
    /// uses `tree_seed(seed, k)`.
    pub gt: Option<GtConfig>,
    pub seed: u64,
    /// Size of the thread pool for split search; the ambient pool when `None`.
    pub workers: Option<usize>,
    /// Only these features may be split on.
    pub restrict_to: Option<Vec<usize>>,
}

impl BoostConfig {
    pub fn new(iterations: usize, shrinkage: f64, alpha: f64, criterion: SplitCriterionConfig) -> Self {
        Self {
            iterations,
            shrinkage,
            alpha,
            criterion,
            splitter: SplitterKind::Exhaustive,
            gt: None,
            seed: 0,
            workers: None,
            restrict_to: None,
        }
    }

    pub fn with_group_test(mut self, s: usize, delta: f64) -> Self {
        self.splitter = SplitterKind::GroupTest;
        self.gt = Some(GtConfig::new(s, delta, 0));
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(ConfigError::Shrinkage(self.shrinkage));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        self.criterion.validate()?;
        match (self.splitter, &self.gt) {
            (SplitterKind::GroupTest, None) => return Err(ConfigError::MissingGtConfig),
            (SplitterKind::GroupTest, Some(gt)) => gt.validate()?,
            _ => {}
        }
        if self.workers == Some(0) {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Name recorded in model files, e.g. `agbm` or `multitask-gtgbm`.
    pub fn mode_name(&self) -> String {
        let gt = self.splitter == SplitterKind::GroupTest;
        match (self.criterion.mode, gt) {
            (CriterionMode::Plain, false) => "plain".into(),
            (CriterionMode::Gbfs, false) => "gbfs".into(),
            (CriterionMode::Agbm, false) => "agbm".into(),
            (CriterionMode::Agbm, true) => "gtgbm".into(),
            (CriterionMode::Multitask, false) => "multitask-agbm".into(),
            (CriterionMode::Multitask, true) => "multitask-gtgbm".into(),
            (CriterionMode::Plain, true) => "plain-grouptest".into(),
            (CriterionMode::Gbfs, true) => "gbfs-grouptest".into(),
        }
    }

    fn tree_params<'a>(
        &'a self,
        round: usize,
        counters: Option<&'a OpCounters>,
        presorted: Option<&'a [Vec<u32>]>,
    ) -> TreeParams<'a> {
        let splitter = match (self.splitter, &self.gt) {
            (SplitterKind::GroupTest, Some(gt)) => Splitter::GroupTest { s: gt.s, delta: gt.delta },
            _ => Splitter::Exhaustive,
        };
        TreeParams {
            criterion: self.criterion,
            alpha: self.alpha,
            splitter,
            seed: tree_seed(self.seed, round),
            features: self.restrict_to.as_deref(),
            counters,
            presorted,
        }
    }

    /// Column orders shared by every tree of an exhaustive fit.
    fn presort<T: Scalar>(&self, x: &FeatureMatrix<T>) -> Option<Vec<Vec<u32>>> {
        (self.splitter == SplitterKind::Exhaustive).then(|| {
            let universe: Vec<usize> = match &self.restrict_to {
                Some(f) => f.clone(),
                None => (0..x.n_features()).collect(),
            };
            presort_columns(x, &universe)
        })
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or inline when `None`.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, Error> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ConfigError::Invalid(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Threads available to split search in the current context.
pub fn current_workers() -> usize {
    rayon::current_num_threads()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel<T> {
    pub mode: String,
    pub base_prediction: T,
    pub shrinkage: T,
    pub trees: Vec<RegressionTree<T>>,
    pub omega: BTreeSet<usize>,
    pub standardization: StandardizationParams<T>,
    pub feature_gain: Vec<T>,
}

impl<T: Scalar> BoostedModel<T> {
    pub fn n_features(&self) -> usize {
        self.standardization.n_features()
    }

    /// Predictions for rows that are already standardized.
    pub fn predict_standardized(&self, z: &FeatureMatrix<T>) -> Result<Vec<T>, DataError> {
        if z.n_features() != self.n_features() {
            return Err(DataError::DimensionMismatch { expected: self.n_features(), found: z.n_features() });
        }
        Ok((0..z.n_rows())
            .map(|i| {
                let mut acc = self.base_prediction;
                for t in &self.trees {
                    acc += self.shrinkage * t.predict_with(|j| z.value(i, j));
                }
                acc
            })
            .collect())
    }
}

/// Per-round training summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub train_rmse: f64,
    pub omega_size: usize,
    pub elapsed_secs: f64,
}

/// Fits a single-task model on a standardized dataset.
pub fn fit<T: Scalar>(ds: &LabeledDataset<T>, cfg: &BoostConfig) -> Result<BoostedModel<T>, Error> {
    fit_logged(ds, cfg, None, |_| {})
}

/// Like [`fit`], reporting every round to `on_round` and counting work in `counters`.
pub fn fit_logged<T: Scalar>(
    ds: &LabeledDataset<T>,
    cfg: &BoostConfig,
    counters: Option<&OpCounters>,
    mut on_round: impl FnMut(&RoundLog) + Send,
) -> Result<BoostedModel<T>, Error> {
    cfg.validate()?;
    let params = ds
        .standardization
        .clone()
        .ok_or_else(|| DataError::Invalid("training data must be standardized first".into()))?;
    let m = ds.n_samples();
    if m < 2 {
        return Err(DataError::TooFewSamples { needed: 2, found: m }.into());
    }
    let shrink = T::lit(cfg.shrinkage);
    with_workers(cfg.workers, || {
        let start = Instant::now();
        let mut residuals = ds.targets.clone();
        let mut h = vec![T::zero(); m];
        let mut usage = FeatureUsageSets::new();
        let mut gain = vec![T::zero(); ds.n_features()];
        let mut trees = Vec::with_capacity(cfg.iterations);
        let sorted = if cfg.iterations > 0 { cfg.presort(&ds.features) } else { None };
        for k in 0..cfg.iterations {
            let fitted = fit_tree(&ds.features, &residuals, &usage, &cfg.tree_params(k, counters, sorted.as_deref()))?;
            for i in 0..m {
                h[i] += shrink * fitted.fitted[i];
                residuals[i] = ds.targets[i] - h[i];
            }
            for (g, &d) in gain.iter_mut().zip(&fitted.feature_gain) {
                *g += d;
            }
            for j in fitted.tree.used_features() {
                usage.mark(j);
            }
            trees.push(fitted.tree);
            on_round(&RoundLog {
                round: k + 1,
                train_rmse: rmse_of(&residuals),
                omega_size: usage.omega.len(),
                elapsed_secs: start.elapsed().as_secs_f64(),
            });
        }
        Ok(BoostedModel {
            mode: cfg.mode_name(),
            base_prediction: T::zero(),
            shrinkage: shrink,
            trees,
            omega: usage.omega,
            standardization: params,
            feature_gain: gain,
        })
    })?
}

fn rmse_of<T: Scalar>(residuals: &[T]) -> f64 {
    let sse: f64 = residuals.iter().map(|r| r.as_f64() * r.as_f64()).sum();
    (sse / residuals.len() as f64).sqrt()
}

/// One model per task plus the shared feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitaskModel<T> {
    pub tasks: Vec<BoostedModel<T>>,
    pub task_names: Vec<String>,
    pub omega_group: BTreeSet<usize>,
}

impl<T> MultitaskModel<T> {
    pub fn task_omega(&self, t: usize) -> &BTreeSet<usize> {
        &self.tasks[t].omega
    }
}

/// Fits all tasks jointly: round `k` fits one tree per task in task order,
/// and each task sees the group set updated by the tasks before it.
pub fn fit_multitask<T: Scalar>(tb: &TaskBundle<T>, cfg: &BoostConfig) -> Result<MultitaskModel<T>, Error> {
    fit_multitask_logged(tb, cfg, |_, _| {})
}

pub fn fit_multitask_logged<T: Scalar>(
    tb: &TaskBundle<T>,
    cfg: &BoostConfig,
    mut on_round: impl FnMut(usize, &RoundLog) + Send,
) -> Result<MultitaskModel<T>, Error> {
    cfg.validate()?;
    if cfg.criterion.mode != CriterionMode::Multitask {
        return Err(ConfigError::Invalid("multitask fitting needs the multitask criterion".into()).into());
    }
    let n_tasks = tb.n_tasks();
    let mut params = Vec::with_capacity(n_tasks);
    for (t, ds) in tb.tasks.iter().enumerate() {
        let p = ds
            .standardization
            .clone()
            .ok_or_else(|| DataError::Invalid(format!("task {t} must be standardized first")))?;
        if ds.n_samples() < 2 {
            return Err(DataError::TooFewSamples { needed: 2, found: ds.n_samples() }.into());
        }
        params.push(p);
    }
    let shrink = T::lit(cfg.shrinkage);
    let d = tb.n_features();
    with_workers(cfg.workers, || {
        let start = Instant::now();
        let mut residuals: Vec<Vec<T>> = tb.tasks.iter().map(|ds| ds.targets.clone()).collect();
        let mut h: Vec<Vec<T>> = tb.tasks.iter().map(|ds| vec![T::zero(); ds.n_samples()]).collect();
        let mut omega_task: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_tasks];
        let mut omega_group = BTreeSet::new();
        let mut gain = vec![vec![T::zero(); d]; n_tasks];
        let mut trees: Vec<Vec<RegressionTree<T>>> = vec![Vec::with_capacity(cfg.iterations); n_tasks];
        let sorted: Vec<Option<Vec<Vec<u32>>>> = if cfg.iterations > 0 {
            tb.tasks.iter().map(|ds| cfg.presort(&ds.features)).collect()
        } else {
            vec![None; n_tasks]
        };
        for k in 0..cfg.iterations {
            for (t, ds) in tb.tasks.iter().enumerate() {
                let usage = FeatureUsageSets::multitask(omega_task[t].iter().copied(), omega_group.iter().copied());
                let fitted =
                    fit_tree(&ds.features, &residuals[t], &usage, &cfg.tree_params(k, None, sorted[t].as_deref()))?;
                for i in 0..ds.n_samples() {
                    h[t][i] += shrink * fitted.fitted[i];
                    residuals[t][i] = ds.targets[i] - h[t][i];
                }
                for (g, &x) in gain[t].iter_mut().zip(&fitted.feature_gain) {
                    *g += x;
                }
                for j in fitted.tree.used_features() {
                    omega_task[t].insert(j);
                    omega_group.insert(j);
                }
                trees[t].push(fitted.tree);
                on_round(
                    t,
                    &RoundLog {
                        round: k + 1,
                        train_rmse: rmse_of(&residuals[t]),
                        omega_size: omega_task[t].len(),
                        elapsed_secs: start.elapsed().as_secs_f64(),
                    },
                );
            }
        }
        let mode = cfg.mode_name();
        let tasks = trees
            .into_iter()
            .zip(omega_task)
            .zip(gain)
            .zip(params)
            .map(|(((trees, omega), feature_gain), standardization)| BoostedModel {
                mode: mode.clone(),
                base_prediction: T::zero(),
                shrinkage: shrink,
                trees,
                omega,
                standardization,
                feature_gain,
            })
            .collect();
        Ok(MultitaskModel { tasks, task_names: tb.task_names.clone(), omega_group })
    })?
}

/// Predictions for raw feature rows: standardized with the stored
/// parameters, clamped to `[0, 1]`, then routed through every tree.
pub fn predict<T: Scalar>(model: &BoostedModel<T>, raw: &FeatureMatrix<T>) -> Result<Vec<T>, DataError> {
    let z = model.standardization.transform(raw)?;
    model.predict_standardized(&z)
}

#[derive(Serialize, Deserialize)]
struct StdEntry {
    min: f64,
    range: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeFile {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { leaf: f64 },
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    nodes: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    mode: String,
    shrinkage: f64,
    base: f64,
    standardization: Vec<StdEntry>,
    trees: Vec<TreeFile>,
    omega: Vec<usize>,
    feature_gain: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TaskFile {
    name: String,
    model: ModelFile,
}

#[derive(Serialize, Deserialize)]
struct MultitaskFile {
    version: u64,
    mode: String,
    omega_group: Vec<usize>,
    tasks: Vec<TaskFile>,
}

fn to_file<T: Scalar>(model: &BoostedModel<T>) -> ModelFile {
    ModelFile {
        version: MODEL_FORMAT_VERSION,
        mode: model.mode.clone(),
        shrinkage: model.shrinkage.as_f64(),
        base: model.base_prediction.as_f64(),
        standardization: model
            .standardization
            .min
            .iter()
            .zip(&model.standardization.range)
            .map(|(m, r)| StdEntry { min: m.as_f64(), range: r.as_f64() })
            .collect(),
        trees: model
            .trees
            .iter()
            .map(|t| TreeFile {
                nodes: t
                    .nodes()
                    .iter()
                    .map(|n| match *n {
                        TreeNode::Split { feature, threshold, left, right } => {
                            NodeFile::Split { feature, threshold: threshold.as_f64(), left, right }
                        }
                        TreeNode::Leaf { value } => NodeFile::Leaf { leaf: value.as_f64() },
                    })
                    .collect(),
            })
            .collect(),
        omega: model.omega.iter().copied().collect(),
        feature_gain: model.feature_gain.iter().map(|g| g.as_f64()).collect(),
    }
}

fn from_file<T: Scalar>(f: ModelFile) -> Result<BoostedModel<T>, ModelError> {
    let d = f.standardization.len();
    let bad = |m: String| ModelError::Malformed(m);
    if f.feature_gain.len() != d {
        return Err(bad(format!("feature_gain has {} entries for {d} features", f.feature_gain.len())));
    }
    if let Some(&j) = f.omega.iter().find(|&&j| j >= d) {
        return Err(bad(format!("omega feature {j} out of range")));
    }
    let mut trees = Vec::with_capacity(f.trees.len());
    for (k, t) in f.trees.into_iter().enumerate() {
        let nodes = t
            .nodes
            .into_iter()
            .map(|n| match n {
                NodeFile::Split { feature, threshold, left, right } => {
                    if feature >= d {
                        Err(bad(format!("tree {k} splits on feature {feature} of {d}")))
                    } else {
                        Ok(TreeNode::Split { feature, threshold: T::lit(threshold), left, right })
                    }
                }
                NodeFile::Leaf { leaf } => Ok(TreeNode::Leaf { value: T::lit(leaf) }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        trees.push(RegressionTree::from_nodes(nodes).map_err(|e| bad(format!("tree {k}: {e}")))?);
    }
    Ok(BoostedModel {
        mode: f.mode,
        base_prediction: T::lit(f.base),
        shrinkage: T::lit(f.shrinkage),
        trees,
        omega: f.omega.into_iter().collect(),
        standardization: StandardizationParams {
            min: f.standardization.iter().map(|e| T::lit(e.min)).collect(),
            range: f.standardization.iter().map(|e| T::lit(e.range)).collect(),
        },
        feature_gain: f.feature_gain.into_iter().map(T::lit).collect(),
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), ModelError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ModelError::Malformed(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
}

fn read_versioned(path: &Path) -> Result<serde_json::Value, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| ModelError::Malformed("missing numeric \"version\" field".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelError::Version { found: version, supported: MODEL_FORMAT_VERSION });
    }
    Ok(value)
}

pub fn model_to_json<T: Scalar>(model: &BoostedModel<T>) -> String {
    serde_json::to_string_pretty(&to_file(model)).expect("model serializes") + "\n"
}

pub fn save_model<T: Scalar>(model: &BoostedModel<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_json(path.as_ref(), &to_file(model))
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<BoostedModel<T>, ModelError> {
    let value = read_versioned(path.as_ref())?;
    if value.get("tasks").is_some() {
        return Err(ModelError::Malformed("file holds a multitask model".into()));
    }
    from_file(serde_json::from_value(value).map_err(|e| ModelError::Malformed(e.to_string()))?)
}

pub fn save_multitask_model<T: Scalar>(model: &MultitaskModel<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let file = MultitaskFile {
        version: MODEL_FORMAT_VERSION,
        mode: model.tasks.first().map(|m| m.mode.clone()).unwrap_or_default(),
        omega_group: model.omega_group.iter().copied().collect(),
        tasks: model
            .tasks
            .iter()
            .zip(&model.task_names)
            .map(|(m, name)| TaskFile { name: name.clone(), model: to_file(m) })
            .collect(),
    };
    write_json(path.as_ref(), &file)
}

pub fn load_multitask_model<T: Scalar>(path: impl AsRef<Path>) -> Result<MultitaskModel<T>, ModelError> {
    let value = read_versioned(path.as_ref())?;
    let file: MultitaskFile = serde_json::from_value(value).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let mut tasks = Vec::with_capacity(file.tasks.len());
    let mut task_names = Vec::with_capacity(file.tasks.len());
    for t in file.tasks {
        task_names.push(t.name);
        tasks.push(from_file(t.model)?);
    }
    Ok(MultitaskModel { tasks, task_names, omega_group: file.omega_group.into_iter().collect() })
}

/// True when the file at `path` holds a multitask model.
pub fn is_multitask_file(path: impl AsRef<Path>) -> Result<bool, ModelError> {
    Ok(read_versioned(path.as_ref())?.get("tasks").is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::standardize;

    fn ds(cols: Vec<Vec<f64>>, y: Vec<f64>) -> LabeledDataset<f64> {
        standardize(LabeledDataset::new(FeatureMatrix::from_columns(cols).unwrap(), y, None).unwrap()).0
    }

    #[test]
    fn single_leaf_predicts_mean() {
        let d = ds(vec![vec![0.0, 1.0, 2.0, 3.0]], vec![1.0, 2.0, 3.0, 6.0]);
        let m = fit(&d, &BoostConfig::new(1, 1.0, 1.0, SplitCriterionConfig::agbm(0.0))).unwrap();
        assert!(m.omega.is_empty());
        let p = predict(&m, &FeatureMatrix::from_columns(vec![vec![-5.0, 10.0]]).unwrap()).unwrap();
        assert_eq!(p, vec![3.0, 3.0]);
    }

    #[test]
    fn separable_fit_is_exact() {
        let d = ds(vec![vec![0.0, 1.0, 2.0, 3.0]], vec![0.0, 0.0, 1.0, 1.0]);
        let m = fit(&d, &BoostConfig::new(1, 1.0, 0.1, SplitCriterionConfig::agbm(0.0))).unwrap();
        assert_eq!(m.omega, BTreeSet::from([0]));
        assert_eq!(m.predict_standardized(&d.features).unwrap(), d.targets);
    }

    #[test]
    fn empty_model_returns_base() {
        let d = ds(vec![vec![0.0, 1.0]], vec![4.0, 5.0]);
        let m = fit(&d, &BoostConfig::new(0, 0.5, 0.5, SplitCriterionConfig::plain())).unwrap();
        assert_eq!(m.predict_standardized(&d.features).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn clamps_out_of_range_inputs() {
        let d = ds(vec![vec![0.0, 1.0, 2.0, 10.0]], vec![0.0, 0.0, 0.0, 1.0]);
        let m = fit(&d, &BoostConfig::new(1, 1.0, 0.1, SplitCriterionConfig::plain())).unwrap();
        let raw = FeatureMatrix::from_columns(vec![vec![12.0, 10.0]]).unwrap();
        let p = predict(&m, &raw).unwrap();
        assert_eq!(p[0], p[1]);
        assert!(predict(&m, &FeatureMatrix::from_columns(vec![vec![1.0], vec![1.0]]).unwrap()).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = BoostConfig::new(5, 0.1, 0.1, SplitCriterionConfig::agbm(0.5));
        assert!(c.validate().is_ok());
        c.splitter = SplitterKind::GroupTest;
        assert_eq!(c.validate(), Err(ConfigError::MissingGtConfig));
        let c = BoostConfig::new(5, 0.0, 0.1, SplitCriterionConfig::agbm(0.5));
        assert!(matches!(c.validate(), Err(ConfigError::Shrinkage(_))));
        let c = BoostConfig::new(5, 0.1, 0.1, SplitCriterionConfig::agbm(1.5));
        assert!(matches!(c.validate(), Err(ConfigError::AgbmMuRange(_))));
    }

    #[test]
    fn unstandardized_data_is_rejected() {
        let raw = LabeledDataset::new(FeatureMatrix::from_columns(vec![vec![0.0, 1.0]]).unwrap(), vec![0.0, 1.0], None)
            .unwrap();
        assert!(fit(&raw, &BoostConfig::new(1, 1.0, 0.5, SplitCriterionConfig::plain())).is_err());
    }

    #[test]
    fn mode_names() {
        let c = BoostConfig::new(1, 1.0, 0.5, SplitCriterionConfig::agbm(0.1));
        assert_eq!(c.mode_name(), "agbm");
        assert_eq!(c.clone().with_group_test(3, 0.1).mode_name(), "gtgbm");
        let c = BoostConfig::new(1, 1.0, 0.5, SplitCriterionConfig::multitask(0.1, 0.1)).with_group_test(3, 0.1);
        assert_eq!(c.mode_name(), "multitask-gtgbm");
    }
}
