//! Group-testing split search.
//!
//! Random feature subsets are searched by repeated halving: at each level
//! both halves are scored by the best SSE achievable when splitting on the
//! sum of their (standardized) features, and the better half survives. The
//! survivors of all subsets form a small candidate set that is then scored
//! exhaustively against the best split over already-used features.
//!
//! Halves are contiguous slices of each subset's stored random order, so a
//! per-subset prefix-sum table gives every per-sample pseudo-feature value in
//! O(1).

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use rayon::prelude::*;

use crate::counters::OpCounters;
use crate::dataset::FeatureMatrix;
use crate::error::{ConfigError, DataError};
use crate::scalar::{cmp_scalar, Scalar};
use crate::seed;
use crate::splitcore::{
    prefer, scan_sorted, search_unsorted, FeatureUsageSets, NodeSplit, NodeTargets, SplitCriterionConfig,
};

/// Parameters of the subset plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtConfig {
    /// Desired number of features.
    pub s: usize,
    /// Allowed failure probability of isolating every active feature.
    pub delta: f64,
    pub seed: u64,
}

impl GtConfig {
    pub fn new(s: usize, delta: f64, seed: u64) -> Self {
        Self { s, delta, seed }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        num_subsets(self.s, self.delta).map(|_| ())
    }
}

/// Number of random subsets: 1 when `s == 1`, else `ceil(e * s * ln(s / delta))`.
pub fn num_subsets(s: usize, delta: f64) -> Result<usize, ConfigError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ConfigError::Delta(delta));
    }
    match s {
        0 => Err(ConfigError::ZeroS),
        1 => Ok(1),
        _ => {
            let s = s as f64;
            Ok((std::f64::consts::E * s * (s / delta).ln()).ceil() as usize)
        }
    }
}

/// Random feature subsets with their halving order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPlan {
    pub subsets: Vec<Vec<usize>>,
    pub seed: u64,
}

impl SubsetPlan {
    /// Wraps explicitly given subsets; each must be non-empty with distinct entries.
    pub fn from_subsets(subsets: Vec<Vec<usize>>) -> Result<Self, ConfigError> {
        for s in &subsets {
            let distinct: BTreeSet<_> = s.iter().collect();
            if s.is_empty() || distinct.len() != s.len() {
                return Err(ConfigError::Invalid("subsets must be non-empty with distinct indices".into()));
            }
        }
        Ok(Self { subsets, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Upper bound on group-test calls for one node: `2 * sum ceil(log2 |G|)`.
    pub fn gt_call_budget(&self) -> u64 {
        self.subsets.iter().map(|g| 2 * ceil_log2(g.len())).sum()
    }
}

pub(crate) fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from(usize::BITS - (n - 1).leading_zeros())
    }
}

/// Plan over features `0..d`.
pub fn make_subset_plan(d: usize, cfg: &GtConfig) -> Result<SubsetPlan, ConfigError> {
    let universe: Vec<usize> = (0..d).collect();
    make_subset_plan_over(&universe, cfg)
}

/// Plan over an explicit feature universe. Each subset holds `ceil(|U| / s)`
/// indices drawn without replacement, in random order; with `s == 1` the
/// single subset is the whole universe, shuffled.
pub fn make_subset_plan_over(universe: &[usize], cfg: &GtConfig) -> Result<SubsetPlan, ConfigError> {
    if universe.is_empty() {
        return Err(ConfigError::Invalid("feature universe is empty".into()));
    }
    let p = num_subsets(cfg.s, cfg.delta)?;
    let size = universe.len().div_ceil(cfg.s).max(1);
    let mut rng = seed::rng(cfg.seed);
    let mut pool = universe.to_vec();
    let subsets = (0..p)
        .map(|_| {
            // Partial Fisher-Yates: the first `size` slots form a uniform ordered sample.
            for i in 0..size {
                let k = rand::Rng::random_range(&mut rng, i..pool.len());
                pool.swap(i, k);
            }
            pool[..size].to_vec()
        })
        .collect();
    Ok(SubsetPlan { subsets, seed: cfg.seed })
}

/// Per-subset cumulative feature sums for every sample.
///
/// Table `t` of subset `G` stores, for boundary `b` in `0..=|G|` and sample
/// `i`, the value `sum_{k < b} x[i, G[k]]` at `t[b * m + i]`.
#[derive(Debug, Clone)]
pub struct PrefixSumCache<T> {
    n_samples: usize,
    tables: Vec<Vec<T>>,
    widths: Vec<usize>,
}

impl<T: Scalar> PrefixSumCache<T> {
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    #[inline]
    fn boundary(&self, subset: usize, b: usize) -> &[T] {
        let m = self.n_samples;
        &self.tables[subset][b * m..(b + 1) * m]
    }

    /// `prefix[sample][b]` of one subset.
    #[inline]
    pub fn prefix(&self, subset: usize, sample: usize, b: usize) -> T {
        self.tables[subset][b * self.n_samples + sample]
    }

    /// Pseudo-feature of the slice `[l, r)` of the subset order for one sample.
    #[inline]
    pub fn slice_sum(&self, subset: usize, sample: usize, slice: Range<usize>) -> T {
        self.prefix(subset, sample, slice.end) - self.prefix(subset, sample, slice.start)
    }

    pub fn subset_width(&self, subset: usize) -> usize {
        self.widths[subset]
    }
}

/// Builds the prefix tables for every subset of `plan` over all rows of `x`.
pub fn build_prefix_cache<T: Scalar>(x: &FeatureMatrix<T>, plan: &SubsetPlan) -> PrefixSumCache<T> {
    let m = x.n_rows();
    let build = |g: &Vec<usize>| {
        let mut t = vec![T::zero(); (g.len() + 1) * m];
        for (b, &j) in g.iter().enumerate() {
            let (done, rest) = t.split_at_mut((b + 1) * m);
            let prev = &done[b * m..];
            let col = x.column(j);
            for ((dst, &p), &v) in rest[..m].iter_mut().zip(prev).zip(col) {
                *dst = p + v;
            }
        }
        t
    };
    let tables = if rayon::current_num_threads() > 1 {
        plan.subsets.par_iter().map(build).collect()
    } else {
        plan.subsets.iter().map(build).collect()
    };
    PrefixSumCache { n_samples: m, tables, widths: plan.subsets.iter().map(Vec::len).collect() }
}

/// Node data shared by all group tests at one split.
pub(crate) struct GtNode<'a, T> {
    pub samples: &'a [u32],
    pub node: &'a NodeTargets<T>,
    pub total_sum: T,
}

impl<'a, T: Scalar> GtNode<'a, T> {
    pub fn new(samples: &'a [u32], node: &'a NodeTargets<T>) -> Self {
        Self { samples, node, total_sum: node.centered.iter().copied().sum() }
    }

    /// Minimum child SSE when splitting on the slice's pseudo-feature.
    pub fn group_test(
        &self,
        cache: &PrefixSumCache<T>,
        subset: usize,
        slice: Range<usize>,
        buf: &mut Vec<(T, T)>,
        counters: Option<&OpCounters>,
    ) -> T {
        let hi = cache.boundary(subset, slice.end);
        let lo = cache.boundary(subset, slice.start);
        buf.clear();
        buf.extend(self.samples.iter().zip(&self.node.centered).map(|(&i, &c)| (hi[i as usize] - lo[i as usize], c)));
        buf.sort_unstable_by(|a, b| cmp_scalar(&a.0, &b.0));
        let n = self.samples.len();
        let (best, evaluated) = scan_sorted(buf.iter().copied(), n, self.node.sse, self.total_sum);
        if let Some(c) = counters {
            c.add_gt_call();
            c.add_scan(evaluated, n as u64);
        }
        best.map_or(self.node.sse, |b| b.raw_sse)
    }

    /// Halves the subset order until one feature remains; returns it with the
    /// number of group tests spent.
    pub fn binary_search(
        &self,
        plan: &SubsetPlan,
        cache: &PrefixSumCache<T>,
        subset: usize,
        buf: &mut Vec<(T, T)>,
        counters: Option<&OpCounters>,
    ) -> (usize, u64) {
        let (mut lo, mut hi) = (0usize, plan.subsets[subset].len());
        let mut calls = 0;
        while hi - lo > 1 {
            let mid = lo + (hi - lo).div_ceil(2);
            let left = self.group_test(cache, subset, lo..mid, buf, counters);
            let right = self.group_test(cache, subset, mid..hi, buf, counters);
            calls += 2;
            if right < left {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (plan.subsets[subset][lo], calls)
    }

    pub fn candidates(
        &self,
        plan: &SubsetPlan,
        cache: &PrefixSumCache<T>,
        counters: Option<&OpCounters>,
    ) -> CandidateSet {
        let survivors: Vec<usize> = if rayon::current_num_threads() > 1 {
            (0..plan.len())
                .into_par_iter()
                .map_init(Vec::new, |buf, s| self.binary_search(plan, cache, s, buf, counters).0)
                .collect()
        } else {
            let mut buf = Vec::with_capacity(self.samples.len());
            (0..plan.len()).map(|s| self.binary_search(plan, cache, s, &mut buf, counters).0).collect()
        };
        CandidateSet::from_survivors(&survivors)
    }
}

/// Survivors of the per-subset binary searches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSet {
    pub features: BTreeSet<usize>,
    /// Subsets whose search ended at each feature.
    pub provenance: BTreeMap<usize, Vec<usize>>,
}

impl CandidateSet {
    fn from_survivors(survivors: &[usize]) -> Self {
        let mut set = CandidateSet::default();
        for (subset, &j) in survivors.iter().enumerate() {
            set.features.insert(j);
            set.provenance.entry(j).or_default().push(subset);
        }
        set
    }

    pub fn contains_all(&self, features: &[usize]) -> bool {
        features.iter().all(|j| self.features.contains(j))
    }
}

fn node_of<T: Scalar>(targets: &[T], node_samples: &[usize]) -> Result<(Vec<u32>, NodeTargets<T>), DataError> {
    if node_samples.len() < 2 {
        return Err(DataError::TooFewSamples { needed: 2, found: node_samples.len() });
    }
    let samples: Vec<u32> = node_samples.iter().map(|&i| i as u32).collect();
    let node = NodeTargets::new(targets, &samples);
    Ok((samples, node))
}

/// Group test of the slice `[l, r)` of one subset over the given samples:
/// the minimum `SSE_L + SSE_R` over thresholds of its pseudo-feature, or the
/// node SSE when the pseudo-feature is constant there.
pub fn group_test<T: Scalar>(
    cache: &PrefixSumCache<T>,
    subset: usize,
    slice: Range<usize>,
    node_samples: &[usize],
    targets: &[T],
    counters: Option<&OpCounters>,
) -> Result<T, DataError> {
    let (samples, node) = node_of(targets, node_samples)?;
    let mut buf = Vec::with_capacity(samples.len());
    Ok(GtNode::new(&samples, &node).group_test(cache, subset, slice, &mut buf, counters))
}

/// Binary search of one subset; returns the surviving feature and the number
/// of group tests used.
pub fn binary_search_subset<T: Scalar>(
    plan: &SubsetPlan,
    cache: &PrefixSumCache<T>,
    subset: usize,
    node_samples: &[usize],
    targets: &[T],
    counters: Option<&OpCounters>,
) -> Result<(usize, u64), DataError> {
    if plan.subsets[subset].len() == 1 {
        return Ok((plan.subsets[subset][0], 0));
    }
    let (samples, node) = node_of(targets, node_samples)?;
    let mut buf = Vec::with_capacity(samples.len());
    Ok(GtNode::new(&samples, &node).binary_search(plan, cache, subset, &mut buf, counters))
}

/// Candidate set produced by binary search over every subset of the plan.
pub fn candidate_set<T: Scalar>(
    plan: &SubsetPlan,
    cache: &PrefixSumCache<T>,
    node_samples: &[usize],
    targets: &[T],
    counters: Option<&OpCounters>,
) -> Result<CandidateSet, DataError> {
    let (samples, node) = node_of(targets, node_samples)?;
    Ok(GtNode::new(&samples, &node).candidates(plan, cache, counters))
}

/// Split selection at one node with group testing.
///
/// The best split over used features (`usage.omega`) competes with the best
/// penalized split over the candidate set; the candidate wins only if it is
/// strictly preferred under the tie rule.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gt_split_node<T: Scalar>(
    x: &FeatureMatrix<T>,
    samples: &[u32],
    node: &NodeTargets<T>,
    cfg: &SplitCriterionConfig,
    plan: &SubsetPlan,
    cache: &PrefixSumCache<T>,
    usage: &FeatureUsageSets,
    sse_root: T,
    counters: Option<&OpCounters>,
) -> (Option<NodeSplit<T>>, CandidateSet) {
    let tol = node.tie_tolerance(cfg, sse_root);
    let used: Vec<usize> = usage.omega.iter().copied().collect();
    let old = search_unsorted(x, samples, node, &used, cfg, usage, sse_root, counters);
    let candidates = GtNode::new(samples, node).candidates(plan, cache, counters);
    let cand_features: Vec<usize> = candidates.features.iter().copied().collect();
    let new = search_unsorted(x, samples, node, &cand_features, cfg, usage, sse_root, counters);
    // `old` is kept on ties.
    (prefer(old, new, tol), candidates)
}

/// Group-testing split for the samples `node_samples`.
#[allow(clippy::too_many_arguments)]
pub fn gt_split<T: Scalar>(
    x: &FeatureMatrix<T>,
    targets: &[T],
    node_samples: &[usize],
    cfg: &SplitCriterionConfig,
    plan: &SubsetPlan,
    cache: &PrefixSumCache<T>,
    usage: &FeatureUsageSets,
    sse_root: T,
    counters: Option<&OpCounters>,
) -> Option<NodeSplit<T>> {
    if cfg.mode.normalizes() && sse_root.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let (samples, node) = node_of(targets, node_samples).ok()?;
    gt_split_node(x, &samples, &node, cfg, plan, cache, usage, sse_root, counters).0
}
