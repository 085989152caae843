//! Immutable datasets and the deterministic resampling primitives of the
//! simulation protocol: train/test splitting, k-fold indices, the constant-n
//! class-swap step, a synthetic two-class generator, and Pearson correlation
//! diagnostics.
//!
//! Dataset values never change after construction, so they are safe to share
//! across workers; every randomized operation is a pure function of its
//! inputs and a [`Seed`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::seed::Seed;

/// Errors from dataset construction and resampling.
#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    /// Dataset has no rows.
    #[error("dataset has no rows")]
    Empty,
    /// A label other than 0/1.
    #[error("label at row {row} is {value}, expected 0 or 1")]
    LabelNotBinary {
        /// Offending row.
        row: usize,
        /// Offending value.
        value: u8,
    },
    /// Row count and label count disagree.
    #[error("feature matrix has {rows} rows but {labels} labels")]
    RowLabelMismatch {
        /// Feature rows.
        rows: usize,
        /// Label count.
        labels: usize,
    },
    /// Feature-name count and matrix width disagree.
    #[error("feature matrix has {cols} columns but {names} names")]
    NameWidthMismatch {
        /// Matrix width.
        cols: usize,
        /// Name count.
        names: usize,
    },
    /// A split fraction that produces an empty partition.
    #[error("test fraction {fraction} produces an empty partition for n={n}")]
    DegenerateSplit {
        /// Requested fraction.
        fraction: f64,
        /// Dataset size.
        n: usize,
    },
    /// Fold count outside 2..=n.
    #[error("fold count {k} out of range for n={n}")]
    InvalidFoldCount {
        /// Requested folds.
        k: usize,
        /// Dataset size.
        n: usize,
    },
    /// The class being reduced has too few members for the requested step.
    #[error("cannot remove {requested} cases from a class of {available} (need strictly more than {requested})")]
    ClassExhausted {
        /// Cases to remove.
        requested: usize,
        /// Class size.
        available: usize,
    },
    /// A prevalence that rounds to an empty class.
    #[error("prevalence {prevalence} yields an empty class for n={n}")]
    DegeneratePrevalence {
        /// Requested prevalence.
        prevalence: f64,
        /// Dataset size.
        n: usize,
    },
    /// Too few rows for the operation.
    #[error("operation requires at least {required} rows, got {got}")]
    TooFewRows {
        /// Minimum rows.
        required: usize,
        /// Actual rows.
        got: usize,
    },
}

/// Direction of a prevalence swap step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapDirection {
    /// Drop positives, resample negatives: prevalence goes down.
    ReducePrevalence,
    /// Drop negatives, resample positives: prevalence goes up.
    IncreasePrevalence,
}

/// A feature matrix with binary labels; the unit of resampling and training.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    label_name: String,
    features: Matrix,
    labels: Vec<u8>,
}

impl Dataset {
    /// Validate and construct a dataset.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        label_name: impl Into<String>,
        features: Matrix,
        labels: Vec<u8>,
    ) -> Result<Self, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Empty);
        }
        if features.rows() != labels.len() {
            return Err(DataError::RowLabelMismatch { rows: features.rows(), labels: labels.len() });
        }
        if features.cols() != feature_names.len() {
            return Err(DataError::NameWidthMismatch {
                cols: features.cols(),
                names: feature_names.len(),
            });
        }
        for (row, &l) in labels.iter().enumerate() {
            if l > 1 {
                return Err(DataError::LabelNotBinary { row, value: l });
            }
        }
        Ok(Dataset { name: name.into(), feature_names, label_name: label_name.into(), features, labels })
    }

    /// Identifier of this dataset.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Feature column names.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Name of the label column.
    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    /// The feature matrix (rows = cases).
    pub fn features(&self) -> &Matrix {
        &self.features
    }

    /// The 0/1 labels, one per row.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of feature columns.
    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Count of positive rows.
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Count of negative rows.
    pub fn negatives(&self) -> usize {
        self.n() - self.positives()
    }

    /// Fraction of positive rows.
    pub fn prevalence(&self) -> f64 {
        self.positives() as f64 / self.n() as f64
    }

    /// New dataset keeping the listed rows, in the given order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Result<Dataset, DataError> {
        if indices.is_empty() {
            return Err(DataError::Empty);
        }
        Dataset::new(
            name,
            self.feature_names.clone(),
            self.label_name.clone(),
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// Disjoint uniform-random train/test partition with
/// `|test| = round(test_fraction * n)`, deterministic under the seed.
pub fn train_test_split(
    ds: &Dataset,
    test_fraction: f64,
    seed: Seed,
) -> Result<(Dataset, Dataset), DataError> {
    let n = ds.n();
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::DegenerateSplit { fraction: test_fraction, n });
    }
    let test_n = (test_fraction * n as f64).round() as usize;
    if test_n == 0 || test_n >= n {
        return Err(DataError::DegenerateSplit { fraction: test_fraction, n });
    }
    let mut rng = seed.rng();
    let mut test_idx: Vec<usize> = sample_indices(&mut rng, n, test_n).into_vec();
    test_idx.sort_unstable();
    let mut in_test = vec![false; n];
    for &i in &test_idx {
        in_test[i] = true;
    }
    let train_idx: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    let train = ds.subset(&train_idx, ds.name())?;
    let test = ds.subset(&test_idx, ds.name())?;
    Ok((train, test))
}

/// `k` disjoint index sets partitioning `0..n`, sizes differing by at most
/// one, deterministic under the seed.
pub fn kfold_indices(n: usize, k: usize, seed: Seed) -> Result<Vec<Vec<usize>>, DataError> {
    if k < 2 || k > n {
        return Err(DataError::InvalidFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.rng());
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold: Vec<usize> = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// One step of the constant-n prevalence swap: remove `k` uniformly sampled
/// rows of one class and append `k` rows sampled with replacement from the
/// surviving pool of the other class. Total row count is unchanged.
///
/// Sampling the additions with replacement is what lets the grown class
/// exceed its original size over repeated steps.
pub fn swap_step(
    ds: &Dataset,
    k: usize,
    direction: SwapDirection,
    seed: Seed,
) -> Result<Dataset, DataError> {
    let shrink_label: u8 = match direction {
        SwapDirection::ReducePrevalence => 1,
        SwapDirection::IncreasePrevalence => 0,
    };
    let shrink_rows: Vec<usize> =
        (0..ds.n()).filter(|&i| ds.labels()[i] == shrink_label).collect();
    if shrink_rows.len() <= k {
        return Err(DataError::ClassExhausted { requested: k, available: shrink_rows.len() });
    }

    let mut rng = seed.rng();
    let mut removed = vec![false; ds.n()];
    if k > 0 {
        for pick in sample_indices(&mut rng, shrink_rows.len(), k) {
            removed[shrink_rows[pick]] = true;
        }
    }
    let survivors: Vec<usize> = (0..ds.n()).filter(|&i| !removed[i]).collect();

    // Grow pool: all surviving rows of the other class (none were removed).
    let grow_rows: Vec<usize> =
        survivors.iter().copied().filter(|&i| ds.labels()[i] != shrink_label).collect();
    let mut indices = survivors.clone();
    for _ in 0..k {
        indices.push(grow_rows[rng.random_range(0..grow_rows.len())]);
    }
    ds.subset(&indices, ds.name())
}

/// Symmetric matrix of Pearson correlations over all feature columns plus
/// the label column.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    /// Column names: features followed by the label.
    pub column_names: Vec<String>,
    /// Row-major `dim x dim` correlation entries.
    pub entries: Matrix,
    /// Columns with zero variance; their correlations are reported as 0 by
    /// convention so the matrix stays total and comparable across iterates.
    pub constant_columns: Vec<usize>,
}

impl CorrelationMatrix {
    /// Matrix dimension (feature count + 1).
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    /// Entry at (`i`, `j`).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    /// Largest absolute entry-wise difference against another matrix of the
    /// same dimension; the drift statistic of the sweep diagnostics.
    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                worst = worst.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        worst
    }
}

/// Pearson correlation of every column pair over features plus label.
/// Constant columns correlate 0 against everything (diagonal stays 1).
pub fn correlation_matrix(ds: &Dataset) -> Result<CorrelationMatrix, DataError> {
    let n = ds.n();
    if n < 2 {
        return Err(DataError::TooFewRows { required: 2, got: n });
    }
    let dim = ds.n_features() + 1;
    let col = |c: usize, row: usize| -> f64 {
        if c < ds.n_features() {
            ds.features().get(row, c)
        } else {
            ds.labels()[row] as f64
        }
    };

    let mut means = vec![0.0; dim];
    for c in 0..dim {
        for r in 0..n {
            means[c] += col(c, r);
        }
        means[c] /= n as f64;
    }
    let mut sd = vec![0.0; dim];
    let mut constant_columns = Vec::new();
    for c in 0..dim {
        let mut ss = 0.0;
        for r in 0..n {
            let d = col(c, r) - means[c];
            ss += d * d;
        }
        sd[c] = ss.sqrt();
        if sd[c] == 0.0 {
            constant_columns.push(c);
        }
    }

    let mut entries = Matrix::zeros(dim, dim);
    for i in 0..dim {
        entries.set(i, i, 1.0);
        for j in 0..i {
            let r = if sd[i] == 0.0 || sd[j] == 0.0 {
                0.0
            } else {
                let mut cov = 0.0;
                for row in 0..n {
                    cov += (col(i, row) - means[i]) * (col(j, row) - means[j]);
                }
                (cov / (sd[i] * sd[j])).clamp(-1.0, 1.0)
            };
            entries.set(i, j, r);
            entries.set(j, i, r);
        }
    }

    let mut column_names: Vec<String> = ds.feature_names().to_vec();
    column_names.push(ds.label_name().to_string());
    Ok(CorrelationMatrix { column_names, entries, constant_columns })
}

/// Generate a two-class Gaussian dataset: `round(prevalence * n)` positive
/// rows whose class mean differs from the negatives by `separation` in every
/// coordinate, unit variance, labels shuffled. Deterministic under the seed.
pub fn synth_dataset(
    n: usize,
    n_features: usize,
    prevalence: f64,
    separation: f64,
    seed: Seed,
) -> Result<Dataset, DataError> {
    if n < 10 {
        return Err(DataError::TooFewRows { required: 10, got: n });
    }
    if !(prevalence > 0.0 && prevalence < 1.0) {
        return Err(DataError::DegeneratePrevalence { prevalence, n });
    }
    let positives = (prevalence * n as f64).round() as usize;
    if positives == 0 || positives >= n {
        return Err(DataError::DegeneratePrevalence { prevalence, n });
    }

    let mut rng = seed.rng();
    let mut labels: Vec<u8> = vec![1; positives];
    labels.resize(n, 0);
    labels.shuffle(&mut rng);

    let mut data = Vec::with_capacity(n * n_features);
    for &label in &labels {
        let shift = if label == 1 { separation } else { 0.0 };
        for _ in 0..n_features {
            let z: f64 = rng.sample(StandardNormal);
            data.push(z + shift);
        }
    }
    let feature_names = (0..n_features).map(|j| format!("f{j}")).collect();
    Dataset::new("synthetic", feature_names, "label", Matrix::from_vec(n, n_features, data), labels)
}
