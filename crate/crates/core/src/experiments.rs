//! Reproducible studies built on the library: the phase-transition grid,
//! the isolation Monte Carlo, exhaustive vs group-test timing, the top-k
//! retraining baseline and correlation export.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::boosting::{fit, BoostConfig, BoostedModel};
use crate::counters::{CounterSnapshot, OpCounters};
use crate::dataset::{generate_synthetic, standardize, LabeledDataset, SyntheticSpec, ACTIVE_FEATURES};
use crate::error::{ConfigError, DataError, Error};
use crate::grouptest::{build_prefix_cache, candidate_set, ceil_log2, make_subset_plan, num_subsets, GtConfig};
use crate::metrics::pearson_matrix;
use crate::scalar::{cmp_scalar, Scalar};
use crate::seed::{derive_seed, rng};
use crate::splitcore::{FeatureUsageSets, SplitCriterionConfig};
use crate::tree::{fit_tree, Splitter, TreeParams};

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(e.to_string()))?;
    write_text(path.as_ref(), &(text + "\n"))
}

// ---------------------------------------------------------------- phase grid

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGridSpec {
    pub d_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub s: usize,
    pub delta: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for PhaseGridSpec {
    fn default() -> Self {
        Self {
            d_values: vec![30, 60, 90, 120, 150],
            n_values: vec![250, 500, 1000, 2000, 4000],
            replicates: 50,
            s: 3,
            delta: 0.1,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

impl PhaseGridSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d_values.is_empty() || self.n_values.is_empty() {
            return Err(ConfigError::Invalid("grid axes must be non-empty".into()));
        }
        if self.replicates == 0 {
            return Err(ConfigError::Invalid("replicates must be at least 1".into()));
        }
        if let Some(d) = self.d_values.iter().find(|&&d| d < 3) {
            return Err(ConfigError::Invalid(format!("d = {d} is below the 3 active features")));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(ConfigError::Invalid(format!("n = {n} is too small to split")));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(ConfigError::Invalid(format!("noise_sd {} must be >= 0", self.noise_sd)));
        }
        num_subsets(self.s, self.delta).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGridResult {
    pub spec: PhaseGridSpec,
    /// `successes[a][b]` counts replicates of `(d_values[a], n_values[b])`.
    pub successes: Vec<Vec<usize>>,
    pub success_rate: Vec<Vec<f64>>,
}

impl PhaseGridResult {
    /// Smallest `n` reaching `level` in each row, if any.
    pub fn frontier(&self, level: f64) -> Vec<Option<usize>> {
        self.success_rate
            .iter()
            .map(|row| row.iter().position(|&r| r >= level).map(|b| self.spec.n_values[b]))
            .collect()
    }

    /// Matrix CSV: one row per `d`, one column per `n`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("d");
        for n in &self.spec.n_values {
            let _ = write!(s, ",n={n}");
        }
        s.push('\n');
        for (d, row) in self.spec.d_values.iter().zip(&self.success_rate) {
            let _ = write!(s, "{d}");
            for r in row {
                let _ = write!(s, ",{r}");
            }
            s.push('\n');
        }
        s
    }

    /// Grayscale heatmap, dark = rate 1.
    pub fn to_svg(&self) -> String {
        let (cell, left, top) = (60usize, 70usize, 30usize);
        let cols = self.spec.n_values.len();
        let rows = self.spec.d_values.len();
        let (w, h) = (left + cell * cols + 10, top + cell * rows + 50);
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"18\">success rate (dark = 1)</text>", left);
        // Largest d on top, as in an (n, d) plane.
        for (a, d) in self.spec.d_values.iter().enumerate().rev() {
            let y = top + cell * (rows - 1 - a);
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">d={d}</text>", left - 6, y + cell / 2 + 4);
            for (b, &r) in self.success_rate[a].iter().enumerate() {
                let g = (255.0 * (1.0 - r)).round().clamp(0.0, 255.0) as u8;
                let x = left + cell * b;
                let _ = writeln!(
                    s,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({g},{g},{g})\"><title>d={d} n={} rate={r}</title></rect>",
                    self.spec.n_values[b]
                );
            }
        }
        for (b, n) in self.spec.n_values.iter().enumerate() {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{n}</text>",
                left + cell * b + cell / 2,
                top + cell * rows + 16
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">n</text>",
            left + cell * cols / 2,
            top + cell * rows + 36
        );
        s.push_str("</svg>\n");
        s
    }
}

/// Whether the root candidate set of one synthetic replicate holds every active feature.
pub fn phase_replicate(d: usize, n: usize, spec: &PhaseGridSpec, replicate: usize) -> Result<bool, Error> {
    let base = derive_seed(spec.seed, &[d as u64, n as u64, replicate as u64]);
    let data = SyntheticSpec { n, d, noise_sd: spec.noise_sd, seed: derive_seed(base, &[0]) };
    let ds = standardize(generate_synthetic::<f64>(&data)?).0;
    let plan = make_subset_plan(d, &GtConfig::new(spec.s, spec.delta, derive_seed(base, &[1])))?;
    let cache = build_prefix_cache(&ds.features, &plan);
    let all: Vec<usize> = (0..n).collect();
    let c = candidate_set(&plan, &cache, &all, &ds.targets, None)?;
    Ok(c.contains_all(&ACTIVE_FEATURES))
}

/// Runs every `(d, n, replicate)` of the grid; cells may run concurrently
/// but results are keyed by position, so the output does not depend on scheduling.
pub fn run_phase_grid(spec: &PhaseGridSpec) -> Result<PhaseGridResult, Error> {
    spec.validate()?;
    let jobs: Vec<(usize, usize, usize)> = (0..spec.d_values.len())
        .flat_map(|a| (0..spec.n_values.len()).flat_map(move |b| (0..spec.replicates).map(move |r| (a, b, r))))
        .collect();
    let outcomes: Vec<bool> = jobs
        .par_iter()
        .map(|&(a, b, r)| phase_replicate(spec.d_values[a], spec.n_values[b], spec, r))
        .collect::<Result<_, _>>()?;
    let mut successes = vec![vec![0usize; spec.n_values.len()]; spec.d_values.len()];
    for (&(a, b, _), ok) in jobs.iter().zip(outcomes) {
        successes[a][b] += usize::from(ok);
    }
    let success_rate =
        successes.iter().map(|row| row.iter().map(|&k| k as f64 / spec.replicates as f64).collect()).collect();
    Ok(PhaseGridResult { spec: spec.clone(), successes, success_rate })
}

// ---------------------------------------------------------------- isolation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsolationReport {
    pub d: usize,
    pub s: usize,
    pub delta: f64,
    pub subsets: usize,
    pub subset_size: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub seed: u64,
}

/// True when every active feature is the only active member of some subset.
pub fn isolates(subsets: &[Vec<usize>], active: &BTreeSet<usize>) -> bool {
    let mut isolated = BTreeSet::new();
    for g in subsets {
        let mut hit = g.iter().filter(|j| active.contains(j));
        if let (Some(&j), None) = (hit.next(), hit.next()) {
            isolated.insert(j);
        }
    }
    isolated.len() == active.len()
}

/// Fraction of random (active set, plan) draws in which isolation fails.
pub fn run_isolation_trial(d: usize, s: usize, delta: f64, trials: usize, seed: u64) -> Result<IsolationReport, Error> {
    if s == 0 || s > d {
        return Err(ConfigError::Invalid(format!("need 1 <= s <= d, got s = {s}, d = {d}")).into());
    }
    if trials == 0 {
        return Err(ConfigError::Invalid("trials must be at least 1".into()).into());
    }
    let p = num_subsets(s, delta)?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(derive_seed(seed, &[t as u64, 0]));
            let active: BTreeSet<usize> = index::sample(&mut r, d, s).into_iter().collect();
            let plan = make_subset_plan(d, &GtConfig::new(s, delta, derive_seed(seed, &[t as u64, 1])))?;
            Ok(usize::from(!isolates(&plan.subsets, &active)))
        })
        .collect::<Result<Vec<usize>, Error>>()?
        .into_iter()
        .sum::<usize>();
    Ok(IsolationReport {
        d,
        s,
        delta,
        subsets: p,
        subset_size: d.div_ceil(s),
        trials,
        failures,
        failure_rate: failures as f64 / trials as f64,
        seed,
    })
}

// ---------------------------------------------------------------- timing

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingSpec {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub delta: f64,
    pub noise_sd: f64,
    pub iterations: usize,
    pub shrinkage: f64,
    pub alpha: f64,
    pub mu: f64,
    pub seed: u64,
}

impl Default for TimingSpec {
    fn default() -> Self {
        Self {
            n: 20_000,
            d: 500,
            s: 10,
            delta: 0.1,
            noise_sd: 1.0,
            iterations: 1,
            shrinkage: 0.1,
            alpha: 0.02,
            mu: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodTiming {
    pub tree_fit_secs: f64,
    pub secs_per_round: f64,
    pub root_split: CounterSnapshot,
    pub total: CounterSnapshot,
}

/// The speed condition `s log s log n << d / log(d/s)`, compared as `<`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl SpeedCondition {
    /// Logs are base 2; `log(d/s)` is floored at 1 so `d <= 2s` stays finite.
    pub fn evaluate(n: usize, d: usize, s: usize) -> Self {
        let s_f = s as f64;
        let lhs = s_f * s_f.log2() * (n as f64).log2();
        let rhs = d as f64 / (d as f64 / s_f).log2().max(1.0);
        Self { lhs, rhs, holds: lhs < rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub delta: f64,
    pub subsets: usize,
    pub iterations: usize,
    pub workers: usize,
    pub exhaustive: MethodTiming,
    pub group_test: MethodTiming,
    /// Sum over features of (distinct root values - 1).
    pub expected_root_scan: u64,
    /// `2 * p * ceil(log2 ceil(d/s))`.
    pub gt_call_budget: u64,
    pub speed_condition: SpeedCondition,
    /// GT root-split threshold evaluations over the exhaustive count.
    pub root_scan_ratio: f64,
    pub wall_clock_speedup: f64,
    pub verdict: String,
}

fn distinct_minus_one<T: Scalar>(col: &[T]) -> u64 {
    let mut v = col.to_vec();
    v.sort_by(cmp_scalar);
    v.dedup();
    v.len().saturating_sub(1) as u64
}

fn time_method<T: Scalar>(ds: &LabeledDataset<T>, cfg: &BoostConfig) -> Result<MethodTiming, Error> {
    let counters = OpCounters::new();
    let mut residuals = ds.targets.clone();
    let mut h = vec![T::zero(); ds.n_samples()];
    let mut usage = FeatureUsageSets::new();
    let shrink = T::lit(cfg.shrinkage);
    let mut secs = 0.0;
    let mut root = None;
    let all: Vec<usize> = (0..ds.n_features()).collect();
    // Presorting is a one-off precompute, kept out of the per-tree time.
    let sorted = cfg.gt.is_none().then(|| crate::tree::presort_columns(&ds.features, &all));
    for k in 0..cfg.iterations {
        let splitter = match &cfg.gt {
            Some(gt) => Splitter::GroupTest { s: gt.s, delta: gt.delta },
            None => Splitter::Exhaustive,
        };
        let mut params = TreeParams::new(cfg.criterion, cfg.alpha, splitter);
        params.seed = crate::seed::tree_seed(cfg.seed, k);
        params.counters = Some(&counters);
        params.presorted = sorted.as_deref();
        let start = Instant::now();
        let f = fit_tree(&ds.features, &residuals, &usage, &params)?;
        secs += start.elapsed().as_secs_f64();
        if k == 0 {
            root = f.root_counters;
        }
        for (i, r) in residuals.iter_mut().enumerate() {
            h[i] += shrink * f.fitted[i];
            *r = ds.targets[i] - h[i];
        }
        for j in f.tree.used_features() {
            usage.mark(j);
        }
    }
    Ok(MethodTiming {
        tree_fit_secs: secs,
        secs_per_round: secs / cfg.iterations.max(1) as f64,
        root_split: root.unwrap_or_default(),
        total: counters.snapshot(),
    })
}

/// Equal-round comparison of exhaustive A-GBM and GT-GBM on one dataset.
///
/// Fails with [`Error::Invariant`] when the exhaustive root scan differs
/// from the distinct-value count or the group-test root exceeds its call budget.
pub fn run_timing<T: Scalar>(ds: &LabeledDataset<T>, spec: &TimingSpec) -> Result<TimingReport, Error> {
    if spec.iterations == 0 {
        return Err(ConfigError::Invalid("timing needs at least one round".into()).into());
    }
    let ds = standardize(ds.clone()).0;
    let (n, d) = (ds.n_samples(), ds.n_features());
    let crit = SplitCriterionConfig::agbm(spec.mu);
    let exhaustive_cfg = BoostConfig::new(spec.iterations, spec.shrinkage, spec.alpha, crit).with_seed(spec.seed);
    let gt_cfg = exhaustive_cfg.clone().with_group_test(spec.s, spec.delta);
    exhaustive_cfg.validate()?;
    gt_cfg.validate()?;
    let exhaustive = time_method(&ds, &exhaustive_cfg)?;
    let group_test = time_method(&ds, &gt_cfg)?;

    let expected_root_scan: u64 = (0..d).map(|j| distinct_minus_one(ds.features.column(j))).sum();
    let p = num_subsets(spec.s, spec.delta)?;
    let gt_call_budget = 2 * p as u64 * ceil_log2(d.div_ceil(spec.s));
    if exhaustive.root_split.threshold_evals != expected_root_scan {
        return Err(Error::Invariant(format!(
            "exhaustive root scanned {} thresholds, expected {expected_root_scan}",
            exhaustive.root_split.threshold_evals
        )));
    }
    if group_test.root_split.gt_calls > gt_call_budget {
        return Err(Error::Invariant(format!(
            "group-test root used {} calls, budget {gt_call_budget}",
            group_test.root_split.gt_calls
        )));
    }
    let speed_condition = SpeedCondition::evaluate(n, d, spec.s);
    Ok(TimingReport {
        n,
        d,
        s: spec.s,
        delta: spec.delta,
        subsets: p,
        iterations: spec.iterations,
        workers: rayon::current_num_threads(),
        exhaustive,
        group_test,
        expected_root_scan,
        gt_call_budget,
        speed_condition,
        root_scan_ratio: group_test.root_split.threshold_evals as f64
            / exhaustive.root_split.threshold_evals.max(1) as f64,
        wall_clock_speedup: exhaustive.tree_fit_secs / group_test.tree_fit_secs.max(f64::MIN_POSITIVE),
        verdict: if speed_condition.holds { "speed condition met" } else { "speed condition not met" }.into(),
    })
}

/// Timing on the synthetic problem sized by `spec`.
pub fn run_timing_synthetic(spec: &TimingSpec) -> Result<TimingReport, Error> {
    let ds =
        generate_synthetic::<f64>(&SyntheticSpec { n: spec.n, d: spec.d, noise_sd: spec.noise_sd, seed: spec.seed })?;
    run_timing(&ds, spec)
}

// ---------------------------------------------------------------- top-k

/// Features ordered by accumulated gain, descending; ties by index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRanking {
    pub order: Vec<usize>,
    pub gains: Vec<f64>,
}

impl ImportanceRanking {
    pub fn from_gains<T: Scalar>(gains: &[T]) -> Self {
        let gains: Vec<f64> = gains.iter().map(|g| g.as_f64()).collect();
        let mut order: Vec<usize> = (0..gains.len()).collect();
        order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
        Self { order, gains }
    }

    pub fn top_k(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }

    /// Ranked features with positive gain.
    pub fn selected(&self) -> Vec<usize> {
        self.order.iter().copied().filter(|&j| self.gains[j] > 0.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopkResult<T> {
    pub full: BoostedModel<T>,
    pub ranking: ImportanceRanking,
    pub retrained: BoostedModel<T>,
}

/// Trains without a penalty on every feature, ranks by gain, then retrains on the top `k`.
pub fn topk_baseline<T: Scalar>(ds: &LabeledDataset<T>, k: usize, base: &BoostConfig) -> Result<TopkResult<T>, Error> {
    let d = ds.n_features();
    if k == 0 || k > d {
        return Err(ConfigError::Invalid(format!("k = {k} must lie in 1..={d}")).into());
    }
    let mut cfg = base.clone();
    cfg.criterion.mu = 0.0;
    cfg.restrict_to = None;
    let full = fit(ds, &cfg)?;
    let ranking = ImportanceRanking::from_gains(&full.feature_gain);
    let mut top: Vec<usize> = ranking.top_k(k).to_vec();
    top.sort_unstable();
    cfg.restrict_to = Some(top);
    let retrained = fit(ds, &cfg)?;
    Ok(TopkResult { full, ranking, retrained })
}

// ---------------------------------------------------------------- correlations

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationExport {
    pub features: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
}

impl CorrelationExport {
    pub fn to_csv(&self, names: Option<&[String]>) -> String {
        let label = |j: usize| names.and_then(|n| n.get(j).cloned()).unwrap_or_else(|| format!("f{j}"));
        let mut s = String::from("feature");
        for &j in &self.features {
            let _ = write!(s, ",{}", label(j));
        }
        s.push('\n');
        for (&j, row) in self.features.iter().zip(&self.matrix) {
            s.push_str(&label(j));
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

/// Pearson matrix of the model's `k` highest-gain features, written as CSV when `path` is given.
pub fn export_correlations<T: Scalar>(
    model: &BoostedModel<T>,
    ds: &LabeledDataset<T>,
    k: usize,
    path: Option<&Path>,
) -> Result<CorrelationExport, Error> {
    let selected = ImportanceRanking::from_gains(&model.feature_gain).selected();
    if k == 0 || selected.len() < k {
        return Err(DataError::Invalid(format!("model ranks {} features, {k} requested", selected.len())).into());
    }
    let features = selected[..k].to_vec();
    let matrix = pearson_matrix(&ds.features, &features)?;
    let out = CorrelationExport { features, matrix };
    if let Some(p) = path {
        write_text(p, &out.to_csv(ds.features.feature_names()))?;
    }
    Ok(out)
}

pub fn write_phase_grid(result: &PhaseGridResult, dir: impl AsRef<Path>) -> Result<(), Error> {
    let dir = dir.as_ref();
    write_text(&dir.join("phase_grid.csv"), &result.to_csv())?;
    write_text(&dir.join("phase_grid.svg"), &result.to_svg())?;
    write_json(dir.join("phase_grid.json"), result)
}
