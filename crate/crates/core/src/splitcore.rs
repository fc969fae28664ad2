//! Penalized CART split criteria and the exhaustive split search.
//!
//! Four criteria share one scan:
//!
//! * `plain`: `SSE_L + SSE_R`
//! * `gbfs`: `SSE_L + SSE_R + mu * [j new]`
//! * `agbm`: `(SSE_L + SSE_R) / SSE_root + mu * [j new]`
//! * `multitask`: `(SSE_L + SSE_R) / SSE_root + mu_group * [j not in group set] + mu_task * [j not in task set]`
//!
//! `SSE_root` is the residual SSE at the root of the tree being grown.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counters::OpCounters;
use crate::dataset::FeatureMatrix;
use crate::error::{ConfigError, DataError};
use crate::scalar::{cmp_scalar, Scalar};

/// Relative width (in units of the node SSE) inside which two criterion
/// values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionMode {
    Plain,
    Gbfs,
    Agbm,
    Multitask,
}

impl CriterionMode {
    pub fn normalizes(self) -> bool {
        matches!(self, CriterionMode::Agbm | CriterionMode::Multitask)
    }
}

/// Criterion selection and penalty weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCriterionConfig {
    pub mode: CriterionMode,
    /// Penalty for a new feature (gbfs, agbm).
    pub mu: f64,
    /// Penalty for a feature no task has used yet (multitask).
    pub mu_group: f64,
    /// Penalty for a feature this task has not used yet (multitask).
    pub mu_task: f64,
}

impl SplitCriterionConfig {
    pub fn plain() -> Self {
        Self { mode: CriterionMode::Plain, mu: 0.0, mu_group: 0.0, mu_task: 0.0 }
    }

    pub fn gbfs(mu: f64) -> Self {
        Self { mode: CriterionMode::Gbfs, mu, ..Self::plain() }
    }

    pub fn agbm(mu: f64) -> Self {
        Self { mode: CriterionMode::Agbm, mu, ..Self::plain() }
    }

    pub fn multitask(mu_group: f64, mu_task: f64) -> Self {
        Self { mode: CriterionMode::Multitask, mu: 0.0, mu_group, mu_task }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(ConfigError::NegativePenalty(v))
            }
        };
        match self.mode {
            CriterionMode::Plain => Ok(()),
            CriterionMode::Gbfs => check(self.mu),
            CriterionMode::Agbm => {
                check(self.mu)?;
                if self.mu > 1.0 {
                    return Err(ConfigError::AgbmMuRange(self.mu));
                }
                Ok(())
            }
            CriterionMode::Multitask => {
                check(self.mu_group)?;
                check(self.mu_task)?;
                if self.mu_group + self.mu_task >= 1.0 {
                    return Err(ConfigError::MultitaskPenaltySum { mu_group: self.mu_group, mu_task: self.mu_task });
                }
                Ok(())
            }
        }
    }

    /// Penalty charged for splitting on `feature` given the usage sets.
    pub fn penalty(&self, feature: usize, usage: &FeatureUsageSets) -> f64 {
        match self.mode {
            CriterionMode::Plain => 0.0,
            CriterionMode::Gbfs | CriterionMode::Agbm => {
                if usage.omega.contains(&feature) {
                    0.0
                } else {
                    self.mu
                }
            }
            CriterionMode::Multitask => {
                let group = if usage.omega_group.contains(&feature) { 0.0 } else { self.mu_group };
                let task = if usage.omega.contains(&feature) { 0.0 } else { self.mu_task };
                group + task
            }
        }
    }

    /// Un-penalized part of the criterion.
    #[inline]
    pub fn base<T: Scalar>(&self, raw_sse: T, sse_root: T) -> T {
        if self.mode.normalizes() {
            raw_sse / sse_root
        } else {
            raw_sse
        }
    }

    #[inline]
    pub fn criterion<T: Scalar>(&self, raw_sse: T, sse_root: T, feature: usize, usage: &FeatureUsageSets) -> T {
        self.base(raw_sse, sse_root) + T::lit(self.penalty(feature, usage))
    }
}

/// Features already paid for.
///
/// `omega` is the model's used set: Ω for a single-task model, or the task's
/// own set Ω^t in multitask mode. `omega_group` is Ω_G, the union over
/// tasks, and is only read by the multitask criterion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureUsageSets {
    pub omega: BTreeSet<usize>,
    pub omega_group: BTreeSet<usize>,
}

impl FeatureUsageSets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(omega: impl IntoIterator<Item = usize>) -> Self {
        Self { omega: omega.into_iter().collect(), omega_group: BTreeSet::new() }
    }

    pub fn multitask(
        omega_task: impl IntoIterator<Item = usize>,
        omega_group: impl IntoIterator<Item = usize>,
    ) -> Self {
        let omega: BTreeSet<usize> = omega_task.into_iter().collect();
        let mut omega_group: BTreeSet<usize> = omega_group.into_iter().collect();
        omega_group.extend(omega.iter().copied());
        Self { omega, omega_group }
    }

    /// Marks `feature` as used in both sets.
    pub fn mark(&mut self, feature: usize) {
        self.omega.insert(feature);
        self.omega_group.insert(feature);
    }
}

/// Chosen split at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSplit<T> {
    pub feature: usize,
    /// Samples with `x < threshold` go left.
    pub threshold: T,
    pub criterion_value: T,
    pub raw_sse: T,
    pub is_new_feature: bool,
}

impl<T: Scalar> NodeSplit<T> {
    /// Tie-aware preference: lower criterion, then a used feature over a new
    /// one, then lower feature index, then lower threshold. `tol` is the
    /// absolute tie width in criterion units.
    pub fn is_better_than(&self, other: &Self, tol: T) -> bool {
        if self.criterion_value < other.criterion_value - tol {
            return true;
        }
        if self.criterion_value > other.criterion_value + tol {
            return false;
        }
        (self.is_new_feature, self.feature)
            .cmp(&(other.is_new_feature, other.feature))
            .then_with(|| cmp_scalar(&self.threshold, &other.threshold))
            .is_lt()
    }
}

/// Keeps the preferred of two optional splits.
pub(crate) fn prefer<T: Scalar>(a: Option<NodeSplit<T>>, b: Option<NodeSplit<T>>, tol: T) -> Option<NodeSplit<T>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.is_better_than(&a, tol) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Sum of squared deviations from the mean.
pub fn sse_root<T: Scalar>(targets: &[T]) -> Result<T, DataError> {
    if targets.is_empty() {
        return Err(DataError::Empty);
    }
    let mean = targets.iter().copied().sum::<T>() / T::from_count(targets.len());
    Ok(targets.iter().map(|&y| (y - mean) * (y - mean)).sum())
}

/// Node-level target statistics, with targets centered at the node mean.
#[derive(Debug, Clone)]
pub(crate) struct NodeTargets<T> {
    pub mean: T,
    pub sse: T,
    /// `residual[i] - mean` for every sample in the node, indexed like the node's sample list.
    pub centered: Vec<T>,
    pub constant: bool,
}

impl<T: Scalar> NodeTargets<T> {
    pub fn new(residuals: &[T], samples: &[u32]) -> Self {
        let n = T::from_count(samples.len());
        let mean = samples.iter().map(|&i| residuals[i as usize]).sum::<T>() / n;
        let centered: Vec<T> = samples.iter().map(|&i| residuals[i as usize] - mean).collect();
        let sse = centered.iter().map(|&c| c * c).sum();
        let first = samples.first().map(|&i| residuals[i as usize]);
        let constant = samples.iter().all(|&i| Some(residuals[i as usize]) == first);
        Self { mean, sse, centered, constant }
    }

    /// Tie width in criterion units for this node.
    pub fn tie_tolerance(&self, cfg: &SplitCriterionConfig, sse_root: T) -> T {
        cfg.base(self.sse, sse_root) * T::lit(TIE_TOLERANCE)
    }
}

/// Best threshold of one value-sorted scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScanBest<T> {
    pub threshold: T,
    pub raw_sse: T,
}

/// Scans `(value, centered target)` pairs in ascending value order.
///
/// Returns the lowest `SSE_L + SSE_R` over thresholds between distinct
/// consecutive values (lowest threshold on ties) and the number of
/// thresholds scored. `total_sum` is the sum of the centered targets.
#[inline]
pub(crate) fn scan_sorted<T: Scalar, I>(pairs: I, n: usize, node_sse: T, total_sum: T) -> (Option<ScanBest<T>>, u64)
where
    I: IntoIterator<Item = (T, T)>,
{
    let total_n = T::from_count(n);
    let tol = node_sse * T::lit(TIE_TOLERANCE);
    let mut best: Option<ScanBest<T>> = None;
    let mut sum_left = T::zero();
    let mut prev: Option<T> = None;
    let mut evaluated = 0u64;
    for (n_left, (x, y)) in pairs.into_iter().enumerate() {
        if let Some(px) = prev {
            if x > px {
                evaluated += 1;
                let nl = T::from_count(n_left);
                let sum_right = total_sum - sum_left;
                let sse = (node_sse - sum_left * sum_left / nl - sum_right * sum_right / (total_n - nl)).max(T::zero());
                if best.is_none_or(|b| sse < b.raw_sse - tol) {
                    let mut mid = px + (x - px) / T::lit(2.0);
                    if mid <= px {
                        mid = x;
                    }
                    best = Some(ScanBest { threshold: mid, raw_sse: sse });
                }
            }
        }
        sum_left += y;
        prev = Some(x);
    }
    (best, evaluated)
}

/// Turns a column's best scan into a scored split.
#[inline]
pub(crate) fn score_feature<T: Scalar>(
    feature: usize,
    best: ScanBest<T>,
    cfg: &SplitCriterionConfig,
    usage: &FeatureUsageSets,
    sse_root: T,
) -> NodeSplit<T> {
    NodeSplit {
        feature,
        threshold: best.threshold,
        criterion_value: cfg.criterion(best.raw_sse, sse_root, feature, usage),
        raw_sse: best.raw_sse,
        is_new_feature: !usage.omega.contains(&feature),
    }
}

/// Evaluates `eval` for every feature and keeps the preferred split.
///
/// Runs on the current rayon pool when it has more than one thread; the
/// reduction walks features in list order either way.
pub(crate) fn reduce_features<T, F>(features: &[usize], tol: T, eval: F) -> Option<NodeSplit<T>>
where
    T: Scalar,
    F: Fn(usize) -> Option<NodeSplit<T>> + Sync,
{
    if rayon::current_num_threads() > 1 && features.len() > 1 {
        let found: Vec<Option<NodeSplit<T>>> = features.par_iter().map(|&j| eval(j)).collect();
        found.into_iter().fold(None, |acc, s| prefer(acc, s, tol))
    } else {
        features.iter().fold(None, |acc, &j| prefer(acc, eval(j), tol))
    }
}

/// Sorts the node's samples by one column and scans it.
pub(crate) fn scan_unsorted_feature<T: Scalar>(
    column: &[T],
    samples: &[u32],
    node: &NodeTargets<T>,
    total_sum: T,
    counters: Option<&OpCounters>,
) -> Option<ScanBest<T>> {
    let mut pairs: Vec<(T, T)> = samples.iter().zip(&node.centered).map(|(&i, &c)| (column[i as usize], c)).collect();
    pairs.sort_unstable_by(|a, b| cmp_scalar(&a.0, &b.0));
    let (best, evaluated) = scan_sorted(pairs, samples.len(), node.sse, total_sum);
    if let Some(c) = counters {
        c.add_scan(evaluated, samples.len() as u64);
    }
    best
}

/// Exhaustive search over `features` for a node given as a sample list.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search_unsorted<T: Scalar>(
    x: &FeatureMatrix<T>,
    samples: &[u32],
    node: &NodeTargets<T>,
    features: &[usize],
    cfg: &SplitCriterionConfig,
    usage: &FeatureUsageSets,
    sse_root: T,
    counters: Option<&OpCounters>,
) -> Option<NodeSplit<T>> {
    let total_sum: T = node.centered.iter().copied().sum();
    let tol = node.tie_tolerance(cfg, sse_root);
    reduce_features(features, tol, |j| {
        scan_unsorted_feature(x.column(j), samples, node, total_sum, counters)
            .map(|b| score_feature(j, b, cfg, usage, sse_root))
    })
}

/// Best split over `feature_subset` for the samples `node_samples`, trying
/// every threshold between distinct consecutive values.
///
/// Returns `None` when fewer than two samples are given, when a normalizing
/// criterion sees `sse_root <= 0`, or when no listed feature takes two
/// distinct values on the node.
#[allow(clippy::too_many_arguments)]
pub fn best_split_exhaustive<T: Scalar>(
    x: &FeatureMatrix<T>,
    targets: &[T],
    node_samples: &[usize],
    feature_subset: &[usize],
    cfg: &SplitCriterionConfig,
    usage: &FeatureUsageSets,
    sse_root: T,
    counters: Option<&OpCounters>,
) -> Option<NodeSplit<T>> {
    if node_samples.len() < 2
        || (cfg.mode.normalizes() && sse_root.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater))
    {
        return None;
    }
    let samples: Vec<u32> = node_samples.iter().map(|&i| i as u32).collect();
    let node = NodeTargets::new(targets, &samples);
    search_unsorted(x, &samples, &node, feature_subset, cfg, usage, sse_root, counters)
}

/// Penalized criterion of the multitask mode from its parts.
pub fn multitask_criterion<T: Scalar>(
    sse_left: T,
    sse_right: T,
    sse_root: T,
    feature: usize,
    cfg: &SplitCriterionConfig,
    usage: &FeatureUsageSets,
) -> T {
    let cfg = SplitCriterionConfig { mode: CriterionMode::Multitask, ..*cfg };
    cfg.criterion(sse_left + sse_right, sse_root, feature, usage)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: Vec<Vec<f64>>) -> FeatureMatrix<f64> {
        FeatureMatrix::from_columns(cols).unwrap()
    }

    #[test]
    fn sse_root_examples() {
        assert_eq!(sse_root(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(sse_root(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(sse_root(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(sse_root::<f64>(&[]).is_err());
    }

    #[test]
    fn separable_plain_split() {
        let x = matrix(vec![vec![0.1, 0.2, 0.8, 0.9]]);
        let y = [0.0, 0.0, 1.0, 1.0];
        let s = best_split_exhaustive(
            &x,
            &y,
            &[0, 1, 2, 3],
            &[0],
            &SplitCriterionConfig::plain(),
            &FeatureUsageSets::new(),
            1.0,
            None,
        )
        .unwrap();
        assert_eq!(s.feature, 0);
        assert!((s.threshold - 0.5).abs() < 1e-15);
        assert_eq!(s.raw_sse, 0.0);
    }

    #[test]
    fn agbm_penalty_examples() {
        let x = matrix(vec![vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]]);
        let y = [1.0, 2.0, 3.0, 4.0];
        let all = [0, 1, 2, 3];
        let s = best_split_exhaustive(
            &x,
            &y,
            &all,
            &[0],
            &SplitCriterionConfig::agbm(0.0),
            &FeatureUsageSets::new(),
            5.0,
            None,
        )
        .unwrap();
        assert!((s.threshold - 0.5).abs() < 1e-15);
        assert!((s.criterion_value - 0.2).abs() < 1e-12);
        let s = best_split_exhaustive(
            &x,
            &y,
            &all,
            &[0],
            &SplitCriterionConfig::agbm(0.9),
            &FeatureUsageSets::new(),
            5.0,
            None,
        )
        .unwrap();
        assert!((s.criterion_value - 1.1).abs() < 1e-12);
        assert!(s.is_new_feature);
        let used = FeatureUsageSets::single([0]);
        let s = best_split_exhaustive(&x, &y, &all, &[0], &SplitCriterionConfig::agbm(0.9), &used, 5.0, None).unwrap();
        assert!((s.criterion_value - 0.2).abs() < 1e-12);
        assert!(!s.is_new_feature);
    }

    #[test]
    fn multitask_criterion_examples() {
        let cfg = SplitCriterionConfig::multitask(0.1, 0.2);
        // normalized part 0.4
        let (l, r, root) = (1.0f64, 1.0, 5.0);
        let group_only = FeatureUsageSets::multitask([], [3]);
        assert!((multitask_criterion(l, r, root, 3, &cfg, &group_only) - 0.6).abs() < 1e-15);
        let both = FeatureUsageSets::multitask([3], []);
        assert!((multitask_criterion(l, r, root, 3, &cfg, &both) - 0.4).abs() < 1e-15);
        assert!((multitask_criterion(l, r, root, 3, &cfg, &FeatureUsageSets::new()) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn no_admissible_split() {
        let x = matrix(vec![vec![0.5, 0.5, 0.5]]);
        let y = [1.0, 2.0, 3.0];
        assert!(best_split_exhaustive(
            &x,
            &y,
            &[0, 1, 2],
            &[0],
            &SplitCriterionConfig::plain(),
            &FeatureUsageSets::new(),
            2.0,
            None
        )
        .is_none());
        assert!(best_split_exhaustive(
            &x,
            &y,
            &[0],
            &[0],
            &SplitCriterionConfig::plain(),
            &FeatureUsageSets::new(),
            2.0,
            None
        )
        .is_none());
    }

    #[test]
    fn ties_prefer_used_then_lower_index() {
        // Features 0 and 1 are identical; 1 is used.
        let col = vec![0.1, 0.4, 0.6, 0.9];
        let x = matrix(vec![col.clone(), col.clone(), col]);
        let y = [0.0, 1.0, 0.0, 1.0];
        let cfg = SplitCriterionConfig::agbm(0.0);
        let s =
            best_split_exhaustive(&x, &y, &[0, 1, 2, 3], &[0, 1, 2], &cfg, &FeatureUsageSets::single([1]), 1.0, None)
                .unwrap();
        assert_eq!(s.feature, 1);
        let s = best_split_exhaustive(&x, &y, &[0, 1, 2, 3], &[2, 1, 0], &cfg, &FeatureUsageSets::new(), 1.0, None)
            .unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn validation() {
        assert!(SplitCriterionConfig::agbm(1.5).validate().is_err());
        assert!(SplitCriterionConfig::agbm(1.0).validate().is_ok());
        assert!(SplitCriterionConfig::gbfs(4.0).validate().is_ok());
        assert!(SplitCriterionConfig::gbfs(-1.0).validate().is_err());
        assert!(SplitCriterionConfig::multitask(0.6, 0.5).validate().is_err());
        assert!(SplitCriterionConfig::multitask(0.3, 0.5).validate().is_ok());
    }

    #[test]
    fn counts_thresholds() {
        let x = matrix(vec![vec![0.1, 0.1, 0.5, 0.9], vec![0.3, 0.2, 0.1, 0.0]]);
        let y = [0.0, 1.0, 0.0, 1.0];
        let c = OpCounters::new();
        best_split_exhaustive(
            &x,
            &y,
            &[0, 1, 2, 3],
            &[0, 1],
            &SplitCriterionConfig::plain(),
            &FeatureUsageSets::new(),
            1.0,
            Some(&c),
        );
        // distinct values minus one: 2 + 3
        assert_eq!(c.snapshot().threshold_evals, 5);
        assert_eq!(c.snapshot().samples_touched, 8);
    }
}
