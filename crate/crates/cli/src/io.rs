//! CSV input and output: dataset ingestion with one-hot encoding of
//! categorical columns, the mirroring dataset writer, the predictions
//! reader, and atomic file writes (write to a temporary file, then rename).

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use prevsweep_core::dataset::{DataError, Dataset};
use prevsweep_core::linalg::Matrix;
use prevsweep_core::roc::{RocError, ScoredPredictions};

/// Errors from CSV ingestion.
#[derive(Debug, Error)]
pub enum IoError {
    /// File-system failure.
    #[error("cannot access {path}: {source}")]
    File {
        /// Path attempted.
        path: String,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Malformed CSV.
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        /// Path attempted.
        path: String,
        /// Underlying error.
        source: csv::Error,
    },
    /// The header is missing a required column.
    #[error("{path}: column {column:?} not found in header")]
    MissingColumn {
        /// Path attempted.
        path: String,
        /// Column that was looked for.
        column: String,
    },
    /// The header names a column twice.
    #[error("{path}: column {column:?} appears more than once in the header")]
    AmbiguousColumn {
        /// Path attempted.
        path: String,
        /// Duplicated column.
        column: String,
    },
    /// A numeric cell failed to parse.
    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadNumber {
        /// Path attempted.
        path: String,
        /// 1-based data row.
        row: usize,
        /// Column name.
        column: String,
        /// Offending cell.
        value: String,
    },
    /// The label column has more than two distinct values.
    #[error("{path}: label column has more than two distinct values: {values:?}")]
    TooManyLabelValues {
        /// Path attempted.
        path: String,
        /// The distinct values seen (first few).
        values: Vec<String>,
    },
    /// The file has no data rows.
    #[error("{path}: no data rows")]
    EmptyFile {
        /// Path attempted.
        path: String,
    },
    /// Dataset-level validation failure.
    #[error(transparent)]
    Data(#[from] DataError),
    /// Score-level validation failure.
    #[error(transparent)]
    Roc(#[from] RocError),
}

/// Load a dataset CSV: UTF-8, comma-separated, header row required. The
/// label column maps to 1 iff the cell equals `positive_label` (at most one
/// other distinct value is allowed). Non-label columns parse as numbers
/// when every cell parses; otherwise they are one-hot encoded with
/// categories in lexicographic order.
pub fn load_csv(path: &Path, label_column: &str, positive_label: &str) -> Result<Dataset, IoError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| match source.kind() {
            csv::ErrorKind::Io(_) => IoError::File {
                path: display.clone(),
                source: std::io::Error::other(source.to_string()),
            },
            _ => IoError::Csv { path: display.clone(), source },
        })?;

    let headers: Vec<String> =
        reader.headers().map_err(|source| IoError::Csv { path: display.clone(), source })?
            .iter()
            .map(str::to_string)
            .collect();
    let mut seen = BTreeSet::new();
    for h in &headers {
        if !seen.insert(h.clone()) {
            return Err(IoError::AmbiguousColumn { path: display, column: h.clone() });
        }
    }
    let label_index = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| IoError::MissingColumn {
            path: display.clone(),
            column: label_column.to_string(),
        })?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| IoError::Csv { path: display.clone(), source })?;
        let _ = i;
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(IoError::EmptyFile { path: display });
    }

    // Labels: positive_label -> 1, exactly one other value -> 0.
    let mut distinct: BTreeSet<String> = BTreeSet::new();
    for row in &rows {
        distinct.insert(row[label_index].clone());
    }
    let others: Vec<&String> = distinct.iter().filter(|v| *v != positive_label).collect();
    if others.len() > 1 {
        return Err(IoError::TooManyLabelValues {
            path: display,
            values: distinct.into_iter().take(5).collect(),
        });
    }
    let labels: Vec<u8> =
        rows.iter().map(|row| u8::from(row[label_index] == positive_label)).collect();

    // Column typing: numeric when every cell parses, categorical when none
    // does. A column mixing numbers with stray unparsable cells is a data
    // error, not a silent categorical.
    enum Encoding {
        Numeric,
        OneHot(Vec<String>),
    }
    let feature_indices: Vec<usize> =
        (0..headers.len()).filter(|&c| c != label_index).collect();
    let mut encodings: Vec<Encoding> = Vec::with_capacity(feature_indices.len());
    for &c in &feature_indices {
        let parsing = rows.iter().filter(|row| row[c].trim().parse::<f64>().is_ok()).count();
        if parsing == rows.len() {
            encodings.push(Encoding::Numeric);
        } else if parsing == 0 {
            let categories: BTreeSet<String> = rows.iter().map(|row| row[c].clone()).collect();
            encodings.push(Encoding::OneHot(categories.into_iter().collect()));
        } else {
            let (row, value) = rows
                .iter()
                .enumerate()
                .find_map(|(r, row)| {
                    row[c].trim().parse::<f64>().is_err().then(|| (r + 1, row[c].clone()))
                })
                .expect("at least one cell failed to parse");
            return Err(IoError::BadNumber { path: display, row, column: headers[c].clone(), value });
        }
    }

    let mut feature_names: Vec<String> = Vec::new();
    for (&c, enc) in feature_indices.iter().zip(&encodings) {
        match enc {
            Encoding::Numeric => feature_names.push(headers[c].clone()),
            Encoding::OneHot(categories) => {
                for cat in categories {
                    feature_names.push(format!("{}={}", headers[c], cat));
                }
            }
        }
    }

    let width = feature_names.len();
    let mut data: Vec<f64> = Vec::with_capacity(rows.len() * width);
    for (r, row) in rows.iter().enumerate() {
        for (&c, enc) in feature_indices.iter().zip(&encodings) {
            match enc {
                Encoding::Numeric => {
                    let cell = row[c].trim();
                    let value = cell.parse::<f64>().map_err(|_| IoError::BadNumber {
                        path: display.clone(),
                        row: r + 1,
                        column: headers[c].clone(),
                        value: row[c].clone(),
                    })?;
                    data.push(value);
                }
                Encoding::OneHot(categories) => {
                    for cat in categories {
                        data.push(if row[c] == *cat { 1.0 } else { 0.0 });
                    }
                }
            }
        }
    }

    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset::new(
        name,
        feature_names,
        label_column,
        Matrix::from_vec(rows.len(), width, data),
        labels,
    )?)
}

/// Write a dataset CSV mirroring the reader: feature columns then the label
/// column, labels as 0/1. Floats use the shortest round-trip formatting, so
/// `load_csv` recovers the exact values.
pub fn write_dataset_csv(ds: &Dataset, path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    for name in ds.feature_names() {
        text.push_str(name);
        text.push(',');
    }
    text.push_str(ds.label_name());
    text.push('\n');
    for r in 0..ds.n() {
        for v in ds.features().row(r) {
            text.push_str(&format!("{v},"));
        }
        text.push_str(&format!("{}\n", ds.labels()[r]));
    }
    write_atomic(path, text.as_bytes())
}

/// Read a predictions CSV with columns `score` and `label`.
pub fn load_predictions(path: &Path) -> Result<ScoredPredictions, IoError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| match source.kind() {
            csv::ErrorKind::Io(_) => IoError::File {
                path: display.clone(),
                source: std::io::Error::other(source.to_string()),
            },
            _ => IoError::Csv { path: display.clone(), source },
        })?;
    let headers = reader
        .headers()
        .map_err(|source| IoError::Csv { path: display.clone(), source })?
        .clone();
    let col = |name: &str| -> Result<usize, IoError> {
        headers.iter().position(|h| h == name).ok_or_else(|| IoError::MissingColumn {
            path: display.clone(),
            column: name.to_string(),
        })
    };
    let score_col = col("score")?;
    let label_col = col("label")?;

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|source| IoError::Csv { path: display.clone(), source })?;
        let score: f64 =
            record[score_col].trim().parse().map_err(|_| IoError::BadNumber {
                path: display.clone(),
                row: r + 1,
                column: "score".into(),
                value: record[score_col].to_string(),
            })?;
        let label: u8 =
            record[label_col].trim().parse().map_err(|_| IoError::BadNumber {
                path: display.clone(),
                row: r + 1,
                column: "label".into(),
                value: record[label_col].to_string(),
            })?;
        scores.push(score);
        labels.push(label);
    }
    if scores.is_empty() {
        return Err(IoError::EmptyFile { path: display });
    }
    Ok(ScoredPredictions::new(scores, labels)?)
}

/// Write a file atomically: contents land in a temporary sibling first and
/// are renamed into place, so readers never observe a half-written report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let display = path.display().to_string();
    let io_err = |source: std::io::Error| IoError::File { path: display.clone(), source };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
