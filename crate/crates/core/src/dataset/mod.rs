//! Column-major datasets, min-max standardization, splitting and the
//! synthetic sparse additive generator.

mod io;
mod synthetic;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

pub use io::{load_csv, load_csv_features, load_svmlight, ColumnRef};
pub use synthetic::{generate_synthetic, synthetic_response, SyntheticSpec, ACTIVE_FEATURES};

use crate::error::DataError;
use crate::scalar::Scalar;
use crate::seed;

/// Dense feature storage, one `Vec` per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    columns: Vec<Vec<T>>,
    n_rows: usize,
    feature_names: Option<Vec<String>>,
}

impl<T: Scalar> FeatureMatrix<T> {
    /// Builds a matrix from columns. Every column must have the same non-zero length.
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self, DataError> {
        let n_rows = columns.first().map_or(0, Vec::len);
        if n_rows == 0 {
            return Err(DataError::Empty);
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(DataError::Invalid(format!("column length {} differs from {}", bad.len(), n_rows)));
        }
        Ok(Self { columns, n_rows, feature_names: None })
    }

    /// Builds a matrix from row-major data.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, DataError> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(DataError::ColumnCount { line: i + 1, expected: d, found: row.len() });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Ok(Self { columns, n_rows: rows.len(), feature_names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, DataError> {
        if names.len() != self.columns.len() {
            return Err(DataError::DimensionMismatch { expected: self.columns.len(), found: names.len() });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> T {
        self.columns[feature][row]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            columns: self.columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
            n_rows: rows.len(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, features: &[usize]) -> Self {
        Self {
            columns: features.iter().map(|&j| self.columns[j].clone()).collect(),
            n_rows: self.n_rows,
            feature_names: self.feature_names.as_ref().map(|n| features.iter().map(|&j| n[j].clone()).collect()),
        }
    }

    /// Appends all-zero columns up to `d` features (zero-padding).
    pub fn pad_to(&mut self, d: usize) {
        while self.columns.len() < d {
            self.columns.push(vec![T::zero(); self.n_rows]);
            if let Some(names) = self.feature_names.as_mut() {
                names.push(format!("f{}", names.len() + 1));
            }
        }
    }
}

/// Per-feature min-max parameters: `x -> (x - min) / range`, or 0 when `range == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams<T> {
    pub min: Vec<T>,
    pub range: Vec<T>,
}

impl<T: Scalar> StandardizationParams<T> {
    pub fn identity(d: usize) -> Self {
        Self { min: vec![T::zero(); d], range: vec![T::one(); d] }
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    #[inline]
    pub fn apply(&self, feature: usize, x: T) -> T {
        let r = self.range[feature];
        if r > T::zero() {
            (x - self.min[feature]) / r
        } else {
            T::zero()
        }
    }

    /// Standardizes and clamps into `[0, 1]`; used for unseen inputs.
    #[inline]
    pub fn apply_clamped(&self, feature: usize, x: T) -> T {
        let z = self.apply(feature, x);
        z.max(T::zero()).min(T::one())
    }

    /// Transforms a raw matrix with these parameters, clamping to `[0, 1]`.
    pub fn transform(&self, raw: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>, DataError> {
        if raw.n_features() != self.n_features() {
            return Err(DataError::DimensionMismatch { expected: self.n_features(), found: raw.n_features() });
        }
        Ok(FeatureMatrix {
            columns: raw
                .columns
                .iter()
                .enumerate()
                .map(|(j, c)| c.iter().map(|&x| self.apply_clamped(j, x)).collect())
                .collect(),
            n_rows: raw.n_rows,
            feature_names: raw.feature_names.clone(),
        })
    }

    /// Columns whose raw range was zero.
    pub fn constant_features(&self) -> Vec<usize> {
        (0..self.range.len()).filter(|&j| self.range[j] == T::zero()).collect()
    }
}

/// Features, targets, optional ranking groups and the standardization that
/// produced the stored feature values (`None` while raw).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    pub features: FeatureMatrix<T>,
    pub targets: Vec<T>,
    pub group_ids: Option<Vec<u64>>,
    pub standardization: Option<StandardizationParams<T>>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(features: FeatureMatrix<T>, targets: Vec<T>, group_ids: Option<Vec<u64>>) -> Result<Self, DataError> {
        if targets.len() != features.n_rows() {
            return Err(DataError::Invalid(format!("{} targets for {} samples", targets.len(), features.n_rows())));
        }
        if let Some(i) = targets.iter().position(|y| !y.is_finite()) {
            return Err(DataError::NonFinite {
                line: i + 1,
                column: "target".into(),
                value: format!("{}", targets[i]),
            });
        }
        if let Some(g) = &group_ids {
            if g.len() != targets.len() {
                return Err(DataError::Invalid(format!("{} group ids for {} samples", g.len(), targets.len())));
            }
        }
        Ok(Self { features, targets, group_ids, standardization: None })
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.features.n_rows()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.features.n_features()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardization.is_some()
    }

    /// Convenience wrapper over [`standardize`] that drops the returned params.
    pub fn standardized(self) -> Self {
        standardize(self).0
    }

    /// Row subset; keeps standardization parameters.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
            group_ids: self.group_ids.as_ref().map(|g| rows.iter().map(|&i| g[i]).collect()),
            standardization: self.standardization.clone(),
        }
    }
}

/// Min-max standardizes every feature into `[0, 1]`.
///
/// A dataset that already carries parameters is returned unchanged, so
/// repeated application is the identity.
pub fn standardize<T: Scalar>(mut ds: LabeledDataset<T>) -> (LabeledDataset<T>, StandardizationParams<T>) {
    if let Some(p) = &ds.standardization {
        let p = p.clone();
        return (ds, p);
    }
    let d = ds.n_features();
    let mut params = StandardizationParams { min: Vec::with_capacity(d), range: Vec::with_capacity(d) };
    for col in ds.features.columns.iter_mut() {
        let (lo, hi) = col.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let range = hi - lo;
        if range > T::zero() {
            for x in col.iter_mut() {
                *x = (*x - lo) / range;
            }
        } else {
            col.iter_mut().for_each(|x| *x = T::zero());
        }
        params.min.push(lo);
        params.range.push(if range > T::zero() { range } else { T::zero() });
    }
    ds.standardization = Some(params.clone());
    (ds, params)
}

/// Seeded random partition into train and validation parts.
///
/// With group ids present whole groups are assigned to one side.
pub fn train_valid_split<T: Scalar>(
    ds: &LabeledDataset<T>,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::InvalidFraction(fraction));
    }
    let m = ds.n_samples();
    let mut rng = seed::rng(seed);
    let (mut train, mut valid) = match &ds.group_ids {
        None => {
            if m < 2 {
                return Err(DataError::TooFewSamples { needed: 2, found: m });
            }
            let mut idx: Vec<usize> = (0..m).collect();
            idx.shuffle(&mut rng);
            let n_train = ((fraction * m as f64).round() as usize).clamp(1, m - 1);
            let valid = idx.split_off(n_train);
            (idx, valid)
        }
        Some(groups) => {
            let mut members: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
            for (i, &g) in groups.iter().enumerate() {
                members.entry(g).or_default().push(i);
            }
            let n_groups = members.len();
            if n_groups < 2 {
                return Err(DataError::TooFewSamples { needed: 2, found: n_groups });
            }
            let mut keys: Vec<u64> = members.keys().copied().collect();
            keys.shuffle(&mut rng);
            let n_train = ((fraction * n_groups as f64).round() as usize).clamp(1, n_groups - 1);
            let collect = |ks: &[u64]| -> Vec<usize> { ks.iter().flat_map(|k| members[k].iter().copied()).collect() };
            (collect(&keys[..n_train]), collect(&keys[n_train..]))
        }
    };
    train.sort_unstable();
    valid.sort_unstable();
    Ok((ds.select_rows(&train), ds.select_rows(&valid)))
}

/// Datasets for several related tasks over one feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskBundle<T> {
    pub tasks: Vec<LabeledDataset<T>>,
    pub task_names: Vec<String>,
}

impl<T: Scalar> TaskBundle<T> {
    /// Bundles tasks; narrower tasks are zero-padded to the widest.
    pub fn new(mut tasks: Vec<LabeledDataset<T>>, task_names: Vec<String>) -> Result<Self, DataError> {
        if tasks.is_empty() {
            return Err(DataError::Empty);
        }
        if task_names.len() != tasks.len() {
            return Err(DataError::Invalid(format!("{} task names for {} tasks", task_names.len(), tasks.len())));
        }
        let d = tasks.iter().map(LabeledDataset::n_features).max().unwrap_or(0);
        for t in tasks.iter_mut() {
            if t.n_features() < d {
                t.features.pad_to(d);
                if let Some(p) = t.standardization.as_mut() {
                    p.min.resize(d, T::zero());
                    p.range.resize(d, T::zero());
                }
            }
        }
        Ok(Self { tasks, task_names })
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_features(&self) -> usize {
        self.tasks[0].n_features()
    }

    pub fn standardized(self) -> Self {
        Self { tasks: self.tasks.into_iter().map(LabeledDataset::standardized).collect(), task_names: self.task_names }
    }
}
