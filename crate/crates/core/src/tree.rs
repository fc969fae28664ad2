//! Regression trees grown level by level with a pluggable split search.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;

use crate::counters::{CounterSnapshot, OpCounters};
use crate::dataset::FeatureMatrix;
use crate::error::{DataError, Error};
use crate::grouptest::{
    build_prefix_cache, gt_split_node, make_subset_plan_over, GtConfig, PrefixSumCache, SubsetPlan,
};
use crate::scalar::{cmp_scalar, Scalar};
use crate::splitcore::{
    reduce_features, scan_sorted, score_feature, FeatureUsageSets, NodeSplit, NodeTargets, SplitCriterionConfig,
};

/// How candidate splits are searched at each node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Splitter {
    /// Every feature, every threshold, over presorted columns.
    Exhaustive,
    /// Group testing with `num_subsets(s, delta)` random subsets per tree.
    GroupTest { s: usize, delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<T> {
    Split { feature: usize, threshold: T, left: usize, right: usize },
    Leaf { value: T },
}

/// Flat tree; node 0 is the root and children are referenced by index.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<T> {
    nodes: Vec<TreeNode<T>>,
}

impl<T: Scalar> RegressionTree<T> {
    /// Validates child references and builds a tree.
    pub fn from_nodes(nodes: Vec<TreeNode<T>>) -> Result<Self, DataError> {
        if nodes.is_empty() {
            return Err(DataError::Invalid("tree has no nodes".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let TreeNode::Split { left, right, .. } = *n {
                if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return Err(DataError::Invalid(format!("node {i} has invalid children")));
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn leaf(value: T) -> Self {
        Self { nodes: vec![TreeNode::Leaf { value }] }
    }

    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    /// Routes one standardized row (`x < threshold` goes left).
    #[inline]
    pub fn predict_with(&self, value: impl Fn(usize) -> T) -> T {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split { feature, threshold, left, right } => {
                    k = if value(feature) < threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        self.predict_with(|j| row[j])
    }

    pub fn used_features(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.used_features().last().copied()
    }
}

/// Everything a single tree fit needs besides the data.
#[derive(Debug, Clone)]
pub struct TreeParams<'a> {
    pub criterion: SplitCriterionConfig,
    /// A node is split only if it holds more than `alpha * m` samples.
    pub alpha: f64,
    pub splitter: Splitter,
    /// Seed of the subset plan (group testing only).
    pub seed: u64,
    /// Restricts the search to these features; all features when `None`.
    pub features: Option<&'a [usize]>,
    pub counters: Option<&'a OpCounters>,
    /// Column orders from [`presort_columns`] over the same feature list;
    /// computed per tree when absent.
    pub presorted: Option<&'a [Vec<u32>]>,
}

impl<'a> TreeParams<'a> {
    pub fn new(criterion: SplitCriterionConfig, alpha: f64, splitter: Splitter) -> Self {
        Self { criterion, alpha, splitter, seed: 0, features: None, counters: None, presorted: None }
    }
}

/// A fitted tree with its training-side byproducts.
#[derive(Debug, Clone)]
pub struct FittedTree<T> {
    pub tree: RegressionTree<T>,
    /// SSE reduction credited to each feature, summed over the tree's splits.
    pub feature_gain: Vec<T>,
    /// Leaf value reached by every training sample.
    pub fitted: Vec<T>,
    /// Residual SSE at the root, the normalizer of the scaled criteria.
    pub sse_root: T,
    /// Work spent choosing the root split, when counters were supplied.
    pub root_counters: Option<CounterSnapshot>,
    /// Candidate set of the root split (group testing only).
    pub root_candidates: Option<BTreeSet<usize>>,
}

struct Pending {
    id: usize,
    samples: Vec<u32>,
    /// Per-feature sample lists sorted by value (exhaustive splitter only).
    sorted: Vec<Vec<u32>>,
}

enum Search<T> {
    Presorted { scratch: Vec<T> },
    GroupTest { plan: SubsetPlan, cache: PrefixSumCache<T> },
}

/// Fits one regression tree to `residuals`, breadth first.
///
/// Features chosen at earlier nodes of this tree are treated as used for
/// the rest of the tree; `usage` itself is not modified.
pub fn fit_tree<T: Scalar>(
    x: &FeatureMatrix<T>,
    residuals: &[T],
    usage: &FeatureUsageSets,
    params: &TreeParams<'_>,
) -> Result<FittedTree<T>, Error> {
    let m = x.n_rows();
    if residuals.len() != m {
        return Err(DataError::DimensionMismatch { expected: m, found: residuals.len() }.into());
    }
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(crate::error::ConfigError::Alpha(params.alpha).into());
    }
    params.criterion.validate()?;
    let universe: Vec<usize> = match params.features {
        Some(f) => f.to_vec(),
        None => (0..x.n_features()).collect(),
    };
    if let Some(&bad) = universe.iter().find(|&&j| j >= x.n_features()) {
        return Err(DataError::Invalid(format!("feature {bad} out of range")).into());
    }
    let cfg = params.criterion;
    let counters = params.counters;
    let min_split = params.alpha * m as f64;

    let root_samples: Vec<u32> = (0..m as u32).collect();
    let root_sorted = match (params.splitter, params.presorted) {
        (Splitter::GroupTest { .. }, _) => Vec::new(),
        (Splitter::Exhaustive, Some(p)) => {
            if p.len() != universe.len() || p.iter().any(|o| o.len() != m) {
                return Err(DataError::Invalid("presorted orders do not match the feature list".into()).into());
            }
            p.to_vec()
        }
        (Splitter::Exhaustive, None) => presort_columns(x, &universe),
    };
    let mut search = match params.splitter {
        Splitter::Exhaustive => Search::Presorted { scratch: vec![T::zero(); m] },
        Splitter::GroupTest { s, delta } => {
            let plan = make_subset_plan_over(&universe, &GtConfig::new(s, delta, params.seed))?;
            let cache = build_prefix_cache(x, &plan);
            Search::GroupTest { plan, cache }
        }
    };

    let mut local = usage.clone();
    let mut nodes: Vec<TreeNode<T>> = vec![TreeNode::Leaf { value: T::zero() }];
    let mut gain = vec![T::zero(); x.n_features()];
    let mut fitted = vec![T::zero(); m];
    let mut sse_root = T::zero();
    let mut root_counters = None;
    let mut root_candidates = None;
    let mut queue = VecDeque::from([Pending { id: 0, samples: root_samples, sorted: root_sorted }]);
    let mut goes_left = vec![false; m];

    while let Some(p) = queue.pop_front() {
        let n = p.samples.len();
        let node = NodeTargets::new(residuals, &p.samples);
        if p.id == 0 {
            sse_root = node.sse;
        }
        let splittable =
            n >= 2 && (n as f64) > min_split && !node.constant && (!cfg.mode.normalizes() || sse_root > T::zero());
        let before = counters.map(OpCounters::snapshot);
        let split = if splittable {
            match &mut search {
                Search::Presorted { scratch } => {
                    search_presorted(x, &p, &universe, &node, scratch, &cfg, &local, sse_root, counters)
                }
                Search::GroupTest { plan, cache } => {
                    let (s, cand) = gt_split_node(x, &p.samples, &node, &cfg, plan, cache, &local, sse_root, counters);
                    if p.id == 0 {
                        root_candidates = Some(cand.features);
                    }
                    s
                }
            }
        } else {
            None
        };
        if p.id == 0 {
            root_counters = counters.zip(before).map(|(c, b)| c.snapshot() - b);
        }
        let Some(split) = split else {
            nodes[p.id] = TreeNode::Leaf { value: node.mean };
            for &i in &p.samples {
                fitted[i as usize] = node.mean;
            }
            continue;
        };

        gain[split.feature] += (node.sse - split.raw_sse).max(T::zero());
        local.mark(split.feature);
        let col = x.column(split.feature);
        for &i in &p.samples {
            goes_left[i as usize] = col[i as usize] < split.threshold;
        }
        let (left_samples, right_samples) = partition(&p.samples, &goes_left);
        let (left_sorted, right_sorted): (Vec<_>, Vec<_>) = if rayon::current_num_threads() > 1 {
            p.sorted.par_iter().map(|o| partition(o, &goes_left)).unzip()
        } else {
            p.sorted.iter().map(|o| partition(o, &goes_left)).unzip()
        };
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf { value: T::zero() });
        nodes.push(TreeNode::Leaf { value: T::zero() });
        nodes[p.id] = TreeNode::Split { feature: split.feature, threshold: split.threshold, left, right };
        queue.push_back(Pending { id: left, samples: left_samples, sorted: left_sorted });
        queue.push_back(Pending { id: right, samples: right_samples, sorted: right_sorted });
    }

    Ok(FittedTree {
        tree: RegressionTree { nodes },
        feature_gain: gain,
        fitted,
        sse_root,
        root_counters,
        root_candidates,
    })
}

fn partition(list: &[u32], goes_left: &[bool]) -> (Vec<u32>, Vec<u32>) {
    let mut l = Vec::with_capacity(list.len() / 2);
    let mut r = Vec::with_capacity(list.len() / 2);
    for &i in list {
        if goes_left[i as usize] {
            l.push(i);
        } else {
            r.push(i);
        }
    }
    (l, r)
}

/// Row indices of each listed column in ascending value order (stable).
pub fn presort_columns<T: Scalar>(x: &FeatureMatrix<T>, universe: &[usize]) -> Vec<Vec<u32>> {
    let sort_one = |&j: &usize| {
        let col = x.column(j);
        let mut o: Vec<u32> = (0..x.n_rows() as u32).collect();
        o.sort_by(|&a, &b| cmp_scalar(&col[a as usize], &col[b as usize]));
        o
    };
    if rayon::current_num_threads() > 1 {
        universe.par_iter().map(sort_one).collect()
    } else {
        universe.iter().map(sort_one).collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn search_presorted<T: Scalar>(
    x: &FeatureMatrix<T>,
    p: &Pending,
    universe: &[usize],
    node: &NodeTargets<T>,
    scratch: &mut [T],
    cfg: &SplitCriterionConfig,
    usage: &FeatureUsageSets,
    sse_root: T,
    counters: Option<&OpCounters>,
) -> Option<NodeSplit<T>> {
    for (&i, &c) in p.samples.iter().zip(&node.centered) {
        scratch[i as usize] = c;
    }
    let scratch = &*scratch;
    let total_sum: T = node.centered.iter().copied().sum();
    let n = p.samples.len();
    let tol = node.tie_tolerance(cfg, sse_root);
    let slot: Vec<usize> = (0..universe.len()).collect();
    reduce_features(&slot, tol, |k| {
        let j = universe[k];
        let col = x.column(j);
        let pairs = p.sorted[k].iter().map(|&i| (col[i as usize], scratch[i as usize]));
        let (best, evaluated) = scan_sorted(pairs, n, node.sse, total_sum);
        if let Some(c) = counters {
            c.add_scan(evaluated, n as u64);
        }
        best.map(|b| score_feature(j, b, cfg, usage, sse_root))
    })
}
