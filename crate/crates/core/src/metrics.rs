//! Evaluation metrics. Ranking metrics order by descending score and break
//! score ties by the original index.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::FeatureMatrix;
use crate::error::MetricError;
use crate::scalar::{cmp_scalar, Scalar};

fn check_lengths<T>(a: &[T], b: &[T]) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

fn binary<T: Scalar>(labels: &[T]) -> Result<Vec<bool>, MetricError> {
    labels
        .iter()
        .map(|&y| {
            if y == T::one() {
                Ok(true)
            } else if y == T::zero() {
                Ok(false)
            } else {
                Err(MetricError::NonBinaryLabel(y.as_f64()))
            }
        })
        .collect()
}

/// Indices sorted by descending score; ties keep index order.
fn ranking<T: Scalar>(scores: &[T], idx: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut order: Vec<usize> = idx.into_iter().collect();
    order.sort_by(|&a, &b| cmp_scalar(&scores[b], &scores[a]));
    order
}

pub fn rmse<T: Scalar>(pred: &[T], truth: &[T]) -> Result<f64, MetricError> {
    check_lengths(pred, truth)?;
    let sse: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, y)| {
            let e = p.as_f64() - y.as_f64();
            e * e
        })
        .sum();
    Ok((sse / pred.len() as f64).sqrt())
}

/// Area under the ROC curve as the Mann-Whitney statistic, with midranks for tied scores.
pub fn auc_roc<T: Scalar>(scores: &[T], labels: &[T]) -> Result<f64, MetricError> {
    check_lengths(scores, labels)?;
    let pos = binary(labels)?;
    let n_pos = pos.iter().filter(|&&p| p).count();
    let n_neg = pos.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| cmp_scalar(&scores[a], &scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean.
        let mid = (i + 1 + j) as f64 / 2.0;
        rank_sum += mid * order[i..j].iter().filter(|&&k| pos[k]).count() as f64;
        i = j;
    }
    let p = n_pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

/// Average precision: mean over positives of the precision at their rank.
pub fn auc_pr<T: Scalar>(scores: &[T], labels: &[T]) -> Result<f64, MetricError> {
    check_lengths(scores, labels)?;
    let pos = binary(labels)?;
    let n_pos = pos.iter().filter(|&&p| p).count();
    if n_pos == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut hits = 0usize;
    let mut acc = 0.0;
    for (r, &i) in ranking(scores, 0..scores.len()).iter().enumerate() {
        if pos[i] {
            hits += 1;
            acc += hits as f64 / (r + 1) as f64;
        }
    }
    Ok(acc / n_pos as f64)
}

/// Sample indices per group id, in index order.
fn group_members(groups: &[u64]) -> BTreeMap<u64, Vec<usize>> {
    let mut m: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &g) in groups.iter().enumerate() {
        m.entry(g).or_default().push(i);
    }
    m
}

/// Fraction of positives among the top `k`.
///
/// With `groups`, computed per group and averaged over groups holding at
/// least `k` items; otherwise over the global ranking.
pub fn precision_at_k<T: Scalar>(
    scores: &[T],
    labels: &[T],
    k: usize,
    groups: Option<&[u64]>,
) -> Result<f64, MetricError> {
    check_lengths(scores, labels)?;
    if k == 0 {
        return Err(MetricError::ZeroK);
    }
    let pos = binary(labels)?;
    let top = |idx: Vec<usize>| ranking(scores, idx).iter().take(k).filter(|&&i| pos[i]).count() as f64 / k as f64;
    match groups {
        None => {
            if k > scores.len() {
                return Err(MetricError::KTooLarge(k));
            }
            Ok(top((0..scores.len()).collect()))
        }
        Some(g) => {
            if g.len() != scores.len() {
                return Err(MetricError::LengthMismatch(g.len(), scores.len()));
            }
            let vals: Vec<f64> = group_members(g).into_values().filter(|m| m.len() >= k).map(top).collect();
            if vals.is_empty() {
                return Err(MetricError::KTooLarge(k));
            }
            Ok(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

/// Mean over groups of `1 / rank` of the first positive; groups without positives are skipped.
pub fn mrr<T: Scalar>(scores: &[T], labels: &[T], groups: &[u64]) -> Result<f64, MetricError> {
    check_lengths(scores, labels)?;
    if groups.len() != scores.len() {
        return Err(MetricError::LengthMismatch(groups.len(), scores.len()));
    }
    let pos = binary(labels)?;
    let rr: Vec<f64> = group_members(groups)
        .into_values()
        .filter_map(|m| ranking(scores, m).iter().position(|&i| pos[i]).map(|r| 1.0 / (r + 1) as f64))
        .collect();
    if rr.is_empty() {
        return Err(MetricError::NoPositives);
    }
    Ok(rr.iter().sum::<f64>() / rr.len() as f64)
}

/// Pairwise Pearson correlations of the listed columns.
pub fn pearson_matrix<T: Scalar>(x: &FeatureMatrix<T>, features: &[usize]) -> Result<Vec<Vec<f64>>, MetricError> {
    let n = x.n_rows() as f64;
    let mut centered = Vec::with_capacity(features.len());
    for &j in features {
        if j >= x.n_features() {
            return Err(MetricError::FeatureOutOfRange(j));
        }
        let col: Vec<f64> = x.column(j).iter().map(|v| v.as_f64()).collect();
        let mean = col.iter().sum::<f64>() / n;
        let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(MetricError::ConstantFeature(j));
        }
        centered.push((c, norm));
    }
    let k = features.len();
    let mut r = vec![vec![0.0; k]; k];
    for a in 0..k {
        r[a][a] = 1.0;
        for b in a + 1..k {
            let dot: f64 = centered[a].0.iter().zip(&centered[b].0).map(|(u, v)| u * v).sum();
            let v = (dot / (centered[a].1 * centered[b].1)).clamp(-1.0, 1.0);
            r[a][b] = v;
            r[b][a] = v;
        }
    }
    Ok(r)
}

/// Mean absolute off-diagonal entry; 0 for matrices smaller than 2x2.
pub fn mean_abs_off_diagonal(r: &[Vec<f64>]) -> f64 {
    let k = r.len();
    if k < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (a, row) in r.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            if a != b {
                acc += v.abs();
            }
        }
    }
    acc / (k * (k - 1)) as f64
}

/// The set of metrics reported by `evaluate`.
///
/// Classification metrics are `None` when labels are not binary or a
/// metric is undefined on the given labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rmse: f64,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
    pub precision_at_k: BTreeMap<usize, f64>,
    pub mrr: Option<f64>,
    pub n_features_used: usize,
}

impl EvalReport {
    /// Computes every metric that is defined for the inputs.
    pub fn compute<T: Scalar>(
        scores: &[T],
        labels: &[T],
        groups: Option<&[u64]>,
        ks: &[usize],
        grouped_precision: bool,
        n_features_used: usize,
    ) -> Result<Self, MetricError> {
        let mut r = EvalReport { rmse: rmse(scores, labels)?, n_features_used, ..Default::default() };
        if binary(labels).is_ok() {
            r.auc_roc = auc_roc(scores, labels).ok();
            r.auc_pr = auc_pr(scores, labels).ok();
            let pg = if grouped_precision { groups } else { None };
            for &k in ks {
                if let Ok(v) = precision_at_k(scores, labels, k, pg) {
                    r.precision_at_k.insert(k, v);
                }
            }
            if let Some(g) = groups {
                r.mrr = mrr(scores, labels, g).ok();
            }
        }
        Ok(r)
    }

    fn fields(&self) -> Vec<(String, Option<f64>)> {
        let mut f = vec![
            ("rmse".to_string(), Some(self.rmse)),
            ("auc_roc".to_string(), self.auc_roc),
            ("auc_pr".to_string(), self.auc_pr),
        ];
        for (k, v) in &self.precision_at_k {
            f.push((format!("precision_at_{k}"), Some(*v)));
        }
        f.push(("mrr".to_string(), self.mrr));
        f.push(("n_features_used".to_string(), Some(self.n_features_used as f64)));
        f
    }

    /// Flat JSON object; undefined metrics are `null`.
    pub fn to_json(&self) -> String {
        let mut m = serde_json::Map::new();
        for (k, v) in self.fields() {
            let value = match (k.as_str(), v) {
                ("n_features_used", _) => serde_json::Value::from(self.n_features_used),
                (_, Some(x)) => serde_json::Value::from(x),
                (_, None) => serde_json::Value::Null,
            };
            m.insert(k, value);
        }
        serde_json::to_string_pretty(&serde_json::Value::Object(m)).expect("report serializes")
    }

    pub fn csv_header(&self) -> String {
        self.fields().into_iter().map(|(k, _)| k).collect::<Vec<_>>().join(",")
    }

    /// One CSV row matching [`csv_header`](Self::csv_header); undefined metrics are empty.
    pub fn csv_row(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(k, v)| match (k.as_str(), v) {
                ("n_features_used", _) => self.n_features_used.to_string(),
                (_, Some(x)) => x.to_string(),
                (_, None) => String::new(),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl Serialize for EvalReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: serde_json::Value = serde_json::from_str(&self.to_json()).map_err(serde::ser::Error::custom)?;
        v.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0, 2.0], &[0.0, 0.0]).unwrap(), 2f64.sqrt());
        assert!(matches!(rmse(&[0.0], &[0.0, 1.0]), Err(MetricError::LengthMismatch(1, 2))));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_roc(&[0.1, 0.2, 0.8, 0.9], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[0.1, 0.4, 0.35, 0.8], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.75);
        assert_eq!(auc_roc(&[0.3; 5], &[0.0, 1.0, 0.0, 1.0, 1.0]).unwrap(), 0.5);
        assert_eq!(auc_roc(&[0.3, 0.4], &[1.0, 1.0]), Err(MetricError::SingleClass));
        assert!(matches!(auc_roc(&[0.3, 0.4], &[1.0, 2.0]), Err(MetricError::NonBinaryLabel(_))));
    }

    #[test]
    fn ap_examples() {
        assert_eq!(auc_pr(&[0.9, 0.8, 0.1], &[1.0, 1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(auc_pr(&[0.2, 0.9], &[1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(auc_pr(&[0.5, 0.4, 0.3, 0.2], &[0.0, 0.0, 0.0, 1.0]).unwrap(), 0.25);
        assert_eq!(auc_pr(&[0.5], &[0.0]), Err(MetricError::NoPositives));
    }

    #[test]
    fn precision_examples() {
        let s = [0.9, 0.8, 0.1, 0.5];
        assert_eq!(precision_at_k(&s, &[1.0, 1.0, 0.0, 0.0], 2, None).unwrap(), 1.0);
        assert_eq!(precision_at_k(&s, &[1.0, 0.0, 0.0, 1.0], 2, None).unwrap(), 0.5);
        let g = [1, 1, 2, 2];
        assert_eq!(precision_at_k(&s, &[1.0, 0.0, 0.0, 0.0], 1, Some(&g)).unwrap(), 0.5);
        assert_eq!(precision_at_k(&s, &[1.0, 0.0, 0.0, 0.0], 3, Some(&g)), Err(MetricError::KTooLarge(3)));
        assert_eq!(precision_at_k(&s, &[1.0, 0.0, 0.0, 0.0], 0, None), Err(MetricError::ZeroK));
    }

    #[test]
    fn mrr_examples() {
        let g = [1, 1, 2, 2, 2, 2];
        let s = [0.9, 0.1, 0.9, 0.8, 0.7, 0.6];
        assert_eq!(mrr(&s, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0], &g).unwrap(), 0.625);
        assert_eq!(mrr(&[0.9, 0.5], &[0.0, 1.0], &[3, 3]).unwrap(), 0.5);
        assert_eq!(mrr(&[0.9, 0.5], &[0.0, 0.0], &[3, 3]), Err(MetricError::NoPositives));
    }

    #[test]
    fn pearson_examples() {
        let x =
            FeatureMatrix::from_columns(vec![vec![0.0, 1.0, 3.0], vec![0.0, -1.0, -3.0], vec![1.0, 1.0, 1.0]]).unwrap();
        let r = pearson_matrix(&x, &[0, 1]).unwrap();
        assert_eq!(r[0][0], 1.0);
        assert!((r[0][1] + 1.0).abs() < 1e-15);
        assert_eq!(r[0][1], r[1][0]);
        assert_eq!(pearson_matrix(&x, &[0, 2]), Err(MetricError::ConstantFeature(2)));
        assert_eq!(pearson_matrix(&x, &[0]).unwrap(), vec![vec![1.0]]);
    }

    #[test]
    fn independent_columns_are_weakly_correlated() {
        use rand::Rng;
        let mut rng = crate::seed::rng(5);
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..10_000).map(|_| rng.random::<f64>()).collect()).collect();
        let r = pearson_matrix(&FeatureMatrix::from_columns(cols).unwrap(), &[0, 1, 2]).unwrap();
        assert!(mean_abs_off_diagonal(&r) < 0.05);
        assert!(r.iter().flatten().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn report_serializations() {
        let r = EvalReport::compute(&[0.9, 0.2, 0.6], &[1.0, 0.0, 1.0], Some(&[1, 1, 2]), &[1, 2], false, 4).unwrap();
        assert_eq!(r.auc_roc, Some(1.0));
        assert_eq!(r.precision_at_k.len(), 2);
        assert_eq!(r.mrr, Some(1.0));
        let header = r.csv_header();
        assert_eq!(header, "rmse,auc_roc,auc_pr,precision_at_1,precision_at_2,mrr,n_features_used");
        assert_eq!(r.csv_row().split(',').count(), header.split(',').count());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["n_features_used"], 4);
        let reg = EvalReport::compute(&[0.5, 1.5], &[0.3, 2.0], None, &[1], false, 0).unwrap();
        assert!(reg.auc_roc.is_none() && reg.precision_at_k.is_empty());
        assert!(reg.csv_row().contains(",,"));
    }
}
