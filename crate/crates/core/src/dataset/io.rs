use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use super::{FeatureMatrix, LabeledDataset};
use crate::error::DataError;
use crate::scalar::Scalar;

/// Column selector: header name or 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl ColumnRef {
    fn resolve(&self, header: &[String]) -> Result<usize, DataError> {
        match self {
            ColumnRef::Index(i) if *i < header.len() => Ok(*i),
            ColumnRef::Index(i) => Err(DataError::MissingColumn(i.to_string())),
            ColumnRef::Name(n) => header.iter().position(|h| h == n).ok_or_else(|| DataError::MissingColumn(n.clone())),
        }
    }
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

fn parse_real<T: Scalar>(raw: &str, line: usize, column: &str) -> Result<T, DataError> {
    let cell = raw.trim();
    let v: f64 =
        cell.parse().map_err(|_| DataError::Parse { line, column: column.to_string(), value: cell.to_string() })?;
    if !v.is_finite() {
        return Err(DataError::NonFinite { line, column: column.to_string(), value: cell.to_string() });
    }
    Ok(T::lit(v))
}

/// Reads a headed CSV file. Every non-target, non-group column becomes a feature.
///
/// Line numbers in errors count the header as line 1.
pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    target: &ColumnRef,
    group: Option<&ColumnRef>,
) -> Result<LabeledDataset<T>, DataError> {
    let table = read_csv(path.as_ref(), Some(target), group, true)?;
    LabeledDataset::new(table.features, table.targets.unwrap_or_default(), table.groups)
}

/// Reads a headed CSV file as features only. A `target` or `group` column
/// is dropped when present and ignored when absent.
pub fn load_csv_features<T: Scalar>(
    path: impl AsRef<Path>,
    target: Option<&ColumnRef>,
    group: Option<&ColumnRef>,
) -> Result<FeatureMatrix<T>, DataError> {
    Ok(read_csv(path.as_ref(), target, group, false)?.features)
}

struct CsvTable<T> {
    features: FeatureMatrix<T>,
    targets: Option<Vec<T>>,
    groups: Option<Vec<u64>>,
}

fn read_csv<T: Scalar>(
    path: &Path,
    target: Option<&ColumnRef>,
    group: Option<&ColumnRef>,
    required: bool,
) -> Result<CsvTable<T>, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(open(path)?);
    let header: Vec<String> =
        reader.headers().map_err(|e| DataError::Csv(e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();
    let resolve = |c: Option<&ColumnRef>| -> Result<Option<usize>, DataError> {
        match c.map(|c| c.resolve(&header)) {
            None => Ok(None),
            Some(Ok(i)) => Ok(Some(i)),
            Some(Err(e)) if required => Err(e),
            Some(Err(_)) => Ok(None),
        }
    };
    let target_col = resolve(target)?;
    let group_col = resolve(group)?;
    let feature_cols: Vec<usize> =
        (0..header.len()).filter(|&c| Some(c) != target_col && Some(c) != group_col).collect();
    if feature_cols.is_empty() {
        return Err(DataError::Invalid("csv has no feature columns".into()));
    }

    let mut columns: Vec<Vec<T>> = vec![Vec::new(); feature_cols.len()];
    let mut targets = target_col.map(|_| Vec::new());
    let mut groups = group_col.map(|_| Vec::new());
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        if record.len() != header.len() {
            return Err(DataError::ColumnCount { line, expected: header.len(), found: record.len() });
        }
        for (dst, &c) in columns.iter_mut().zip(&feature_cols) {
            dst.push(parse_real(&record[c], line, &header[c])?);
        }
        if let (Some(t), Some(tc)) = (targets.as_mut(), target_col) {
            t.push(parse_real(&record[tc], line, &header[tc])?);
        }
        if let (Some(g), Some(gc)) = (groups.as_mut(), group_col) {
            let cell = record[gc].trim();
            g.push(cell.parse::<u64>().map_err(|_| DataError::Parse {
                line,
                column: header[gc].clone(),
                value: cell.to_string(),
            })?);
        }
    }
    if columns[0].is_empty() {
        return Err(DataError::Empty);
    }
    let features =
        FeatureMatrix::from_columns(columns)?.with_names(feature_cols.iter().map(|&c| header[c].clone()).collect())?;
    Ok(CsvTable { features, targets, groups })
}

/// Reads svmlight/libsvm text: `label [qid:N] idx:val ...` with 1-based,
/// strictly increasing indices. Absent entries are zero; `#` starts a comment.
pub fn load_svmlight<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledDataset<T>, DataError> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    let mut labels = Vec::new();
    let mut qids: Vec<Option<u64>> = Vec::new();
    let mut rows: Vec<Vec<(usize, T)>> = Vec::new();
    let mut d = 0usize;
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        labels.push(parse_real::<T>(label_tok, line_no, "label")?);
        let mut qid = None;
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (key, val) = tok.split_once(':').ok_or_else(|| DataError::Svmlight {
                line: line_no,
                message: format!("token {tok:?} is not idx:value"),
            })?;
            if key == "qid" {
                qid = Some(
                    val.parse::<u64>()
                        .map_err(|_| DataError::Svmlight { line: line_no, message: format!("bad qid {val:?}") })?,
                );
                continue;
            }
            let idx: usize = key
                .parse()
                .map_err(|_| DataError::Svmlight { line: line_no, message: format!("bad feature index {key:?}") })?;
            if idx == 0 || idx <= last {
                return Err(DataError::Svmlight {
                    line: line_no,
                    message: format!("feature index {idx} is not strictly increasing (previous {last})"),
                });
            }
            last = idx;
            entries.push((idx - 1, parse_real::<T>(val, line_no, key)?));
        }
        d = d.max(last);
        qids.push(qid);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    if d == 0 {
        d = 1;
    }
    let mut columns = vec![vec![T::zero(); rows.len()]; d];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            columns[j][i] = v;
        }
    }
    let groups = if qids.iter().all(Option::is_some) {
        Some(qids.into_iter().flatten().collect())
    } else if qids.iter().all(Option::is_none) {
        None
    } else {
        return Err(DataError::Invalid("qid present on some lines only".into()));
    };
    LabeledDataset::new(FeatureMatrix::from_columns(columns)?, labels, groups)
}
