//! Seven trainable classifiers behind one probability-scoring interface,
//! with k-fold cross-validated hyperparameter selection.
//!
//! The learners are deliberately simple, deterministic, dependency-free
//! analogues of their production counterparts: batch gradient-descent
//! logistic regression, ridge-stabilized LDA, brute-force KNN, CART trees,
//! a bagged forest, stump gradient boosting on logistic loss, and a naive
//! random-guess baseline. Every fit is a pure function of (spec, data, seed).

mod forest;
mod gbm;
mod knn;
mod lda;
mod logreg;
mod random_guess;
mod tree;

pub use forest::ForestModel;
pub use gbm::GbmModel;
pub use knn::KnnModel;
pub use lda::LdaModel;
pub use logreg::{loss_and_gradient, FitDiagnostics, LogRegModel};
pub use random_guess::{random_guess_scores, RandomGuessModel};
pub use tree::TreeModel;

use alloc::vec::Vec;

use thiserror::Error;

use crate::dataset::{kfold_indices, DataError, Dataset};
use crate::linalg::Matrix;
use crate::seed::Seed;

/// Errors from model training and prediction.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    /// Training data contains only one class.
    #[error("single-class training data: positives={positives}, negatives={negatives}")]
    SingleClass {
        /// Positive rows.
        positives: usize,
        /// Negative rows.
        negatives: usize,
    },
    /// A hyperparameter grid is empty or contains a non-positive value.
    #[error("invalid hyperparameter grid for {model}: {reason}")]
    InvalidGrid {
        /// Model name.
        model: &'static str,
        /// What is wrong.
        reason: &'static str,
    },
    /// Prediction feature width differs from training width.
    #[error("feature width mismatch: trained on {expected}, got {got}")]
    WidthMismatch {
        /// Training width.
        expected: usize,
        /// Prediction width.
        got: usize,
    },
    /// Underlying dataset error (fold construction).
    #[error(transparent)]
    Data(#[from] DataError),
}

/// The model family identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    /// Logistic regression (GLM).
    LogisticRegression,
    /// Linear discriminant analysis.
    Lda,
    /// k-nearest neighbors.
    Knn,
    /// Single CART decision tree.
    DecisionTree,
    /// Bagged random forest.
    RandomForest,
    /// Gradient-boosted stumps.
    GradientBoosting,
    /// Prevalence-matched random guessing.
    RandomGuess,
}

impl ModelKind {
    /// All seven kinds in canonical order.
    pub fn all() -> [ModelKind; 7] {
        [
            ModelKind::LogisticRegression,
            ModelKind::Lda,
            ModelKind::Knn,
            ModelKind::DecisionTree,
            ModelKind::RandomForest,
            ModelKind::GradientBoosting,
            ModelKind::RandomGuess,
        ]
    }

    /// Short stable name used in report tables.
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "GLM",
            ModelKind::Lda => "LDA",
            ModelKind::Knn => "KNN",
            ModelKind::DecisionTree => "TREE",
            ModelKind::RandomForest => "RF",
            ModelKind::GradientBoosting => "GBM",
            ModelKind::RandomGuess => "randomguess",
        }
    }

    /// Parse a name produced by [`ModelKind::name`].
    pub fn from_name(name: &str) -> Option<ModelKind> {
        ModelKind::all().into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

/// A model family plus its hyperparameter grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Logistic regression; the grid is a singleton by default.
    LogisticRegression {
        /// L2 penalty on the weights (intercept unpenalized).
        l2: f64,
    },
    /// LDA with ridge-inflated pooled covariance.
    Lda {
        /// Ridge factor: `ridge * trace / d` is added to the diagonal.
        ridge: f64,
    },
    /// KNN over a grid of neighbor counts.
    Knn {
        /// Candidate neighbor counts.
        neighbor_grid: Vec<usize>,
    },
    /// CART over a grid of depth limits.
    DecisionTree {
        /// Candidate maximum depths.
        depth_grid: Vec<usize>,
        /// Minimum rows per leaf.
        min_leaf: usize,
    },
    /// Random forest over a grid of forest sizes.
    RandomForest {
        /// Candidate tree counts.
        n_trees_grid: Vec<usize>,
        /// Depth limit of each tree.
        max_depth: usize,
        /// Minimum rows per leaf.
        min_leaf: usize,
    },
    /// Gradient-boosted stumps over a grid of round counts.
    GradientBoosting {
        /// Candidate boosting round counts.
        rounds_grid: Vec<usize>,
        /// Shrinkage applied to each stump.
        learning_rate: f64,
        /// Minimum rows per stump side.
        min_leaf: usize,
    },
    /// Prevalence-matched random guess; no hyperparameters.
    RandomGuess,
}

impl ModelSpec {
    /// The family this spec belongs to.
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::LogisticRegression { .. } => ModelKind::LogisticRegression,
            ModelSpec::Lda { .. } => ModelKind::Lda,
            ModelSpec::Knn { .. } => ModelKind::Knn,
            ModelSpec::DecisionTree { .. } => ModelKind::DecisionTree,
            ModelSpec::RandomForest { .. } => ModelKind::RandomForest,
            ModelSpec::GradientBoosting { .. } => ModelKind::GradientBoosting,
            ModelSpec::RandomGuess => ModelKind::RandomGuess,
        }
    }

    /// The default spec for a family.
    pub fn default_for(kind: ModelKind) -> ModelSpec {
        match kind {
            ModelKind::LogisticRegression => ModelSpec::LogisticRegression { l2: 1e-6 },
            ModelKind::Lda => ModelSpec::Lda { ridge: 1e-6 },
            ModelKind::Knn => ModelSpec::Knn { neighbor_grid: alloc::vec![5, 15, 31] },
            ModelKind::DecisionTree => {
                ModelSpec::DecisionTree { depth_grid: alloc::vec![3, 5], min_leaf: 5 }
            }
            ModelKind::RandomForest => ModelSpec::RandomForest {
                n_trees_grid: alloc::vec![50],
                max_depth: 8,
                min_leaf: 5,
            },
            ModelKind::GradientBoosting => ModelSpec::GradientBoosting {
                rounds_grid: alloc::vec![100],
                learning_rate: 0.1,
                min_leaf: 5,
            },
            ModelKind::RandomGuess => ModelSpec::RandomGuess,
        }
    }

    /// Default specs for all seven families.
    pub fn defaults() -> Vec<ModelSpec> {
        ModelKind::all().into_iter().map(ModelSpec::default_for).collect()
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |model, reason| Err(ModelError::InvalidGrid { model, reason });
        match self {
            ModelSpec::LogisticRegression { l2 } => {
                if l2.is_nan() || *l2 < 0.0 {
                    return bad("GLM", "l2 must be non-negative");
                }
            }
            ModelSpec::Lda { ridge } => {
                if ridge.is_nan() || *ridge <= 0.0 {
                    return bad("LDA", "ridge must be positive");
                }
            }
            ModelSpec::Knn { neighbor_grid } => {
                if neighbor_grid.is_empty() {
                    return bad("KNN", "empty neighbor grid");
                }
                if neighbor_grid.contains(&0) {
                    return bad("KNN", "neighbor counts must be positive");
                }
            }
            ModelSpec::DecisionTree { depth_grid, min_leaf } => {
                if depth_grid.is_empty() {
                    return bad("TREE", "empty depth grid");
                }
                if depth_grid.contains(&0) || *min_leaf == 0 {
                    return bad("TREE", "depths and min_leaf must be positive");
                }
            }
            ModelSpec::RandomForest { n_trees_grid, max_depth, min_leaf } => {
                if n_trees_grid.is_empty() {
                    return bad("RF", "empty forest-size grid");
                }
                if n_trees_grid.contains(&0) || *max_depth == 0 || *min_leaf == 0 {
                    return bad("RF", "sizes, depth and min_leaf must be positive");
                }
            }
            ModelSpec::GradientBoosting { rounds_grid, learning_rate, min_leaf } => {
                if rounds_grid.is_empty() {
                    return bad("GBM", "empty rounds grid");
                }
                if rounds_grid.contains(&0) || *min_leaf == 0 {
                    return bad("GBM", "rounds and min_leaf must be positive");
                }
                if learning_rate.is_nan() || *learning_rate <= 0.0 {
                    return bad("GBM", "learning rate must be positive");
                }
            }
            ModelSpec::RandomGuess => {}
        }
        Ok(())
    }

    /// Number of grid points.
    fn grid_len(&self) -> usize {
        match self {
            ModelSpec::Knn { neighbor_grid } => neighbor_grid.len(),
            ModelSpec::DecisionTree { depth_grid, .. } => depth_grid.len(),
            ModelSpec::RandomForest { n_trees_grid, .. } => n_trees_grid.len(),
            ModelSpec::GradientBoosting { rounds_grid, .. } => rounds_grid.len(),
            _ => 1,
        }
    }

    /// Fit the `point`-th grid configuration on the given rows.
    fn fit_grid_point(
        &self,
        point: usize,
        x: &Matrix,
        y: &[u8],
        seed: Seed,
    ) -> Result<TrainedModel, ModelError> {
        Ok(match self {
            ModelSpec::LogisticRegression { l2 } => {
                TrainedModel::LogisticRegression(logreg::fit(x, y, *l2))
            }
            ModelSpec::Lda { ridge } => TrainedModel::Lda(lda::fit(x, y, *ridge)?),
            ModelSpec::Knn { neighbor_grid } => {
                TrainedModel::Knn(knn::fit(x, y, neighbor_grid[point]))
            }
            ModelSpec::DecisionTree { depth_grid, min_leaf } => {
                TrainedModel::DecisionTree(tree::fit(x, y, depth_grid[point], *min_leaf))
            }
            ModelSpec::RandomForest { n_trees_grid, max_depth, min_leaf } => {
                TrainedModel::RandomForest(forest::fit(
                    x,
                    y,
                    n_trees_grid[point],
                    *max_depth,
                    *min_leaf,
                    seed,
                ))
            }
            ModelSpec::GradientBoosting { rounds_grid, learning_rate, min_leaf } => {
                TrainedModel::GradientBoosting(gbm::fit(
                    x,
                    y,
                    rounds_grid[point],
                    *learning_rate,
                    *min_leaf,
                ))
            }
            ModelSpec::RandomGuess => {
                let prevalence =
                    y.iter().filter(|&&l| l == 1).count() as f64 / y.len() as f64;
                TrainedModel::RandomGuess(RandomGuessModel::new(x.cols(), prevalence, seed))
            }
        })
    }
}

/// A fitted model; immutable and safe for concurrent prediction.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    /// Fitted logistic regression.
    LogisticRegression(LogRegModel),
    /// Fitted LDA.
    Lda(LdaModel),
    /// Fitted KNN (stores the standardized training set).
    Knn(KnnModel),
    /// Fitted decision tree.
    DecisionTree(TreeModel),
    /// Fitted random forest.
    RandomForest(ForestModel),
    /// Fitted gradient-boosted stumps.
    GradientBoosting(GbmModel),
    /// Random-guess baseline.
    RandomGuess(RandomGuessModel),
}

impl TrainedModel {
    /// The family of this model.
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::LogisticRegression(_) => ModelKind::LogisticRegression,
            TrainedModel::Lda(_) => ModelKind::Lda,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::DecisionTree(_) => ModelKind::DecisionTree,
            TrainedModel::RandomForest(_) => ModelKind::RandomForest,
            TrainedModel::GradientBoosting(_) => ModelKind::GradientBoosting,
            TrainedModel::RandomGuess(_) => ModelKind::RandomGuess,
        }
    }

    /// Feature width the model was trained on.
    pub fn width(&self) -> usize {
        match self {
            TrainedModel::LogisticRegression(m) => m.width(),
            TrainedModel::Lda(m) => m.width(),
            TrainedModel::Knn(m) => m.width(),
            TrainedModel::DecisionTree(m) => m.width(),
            TrainedModel::RandomForest(m) => m.width(),
            TrainedModel::GradientBoosting(m) => m.width(),
            TrainedModel::RandomGuess(m) => m.width(),
        }
    }

    /// Positive-class probability for every row. Deterministic; scores are
    /// always inside [0, 1].
    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>, ModelError> {
        if features.cols() != self.width() {
            return Err(ModelError::WidthMismatch { expected: self.width(), got: features.cols() });
        }
        Ok(match self {
            TrainedModel::LogisticRegression(m) => m.predict(features),
            TrainedModel::Lda(m) => m.predict(features),
            TrainedModel::Knn(m) => m.predict(features),
            TrainedModel::DecisionTree(m) => m.predict(features),
            TrainedModel::RandomForest(m) => m.predict(features),
            TrainedModel::GradientBoosting(m) => m.predict(features),
            TrainedModel::RandomGuess(m) => m.predict(features),
        })
    }

    /// Optimizer diagnostics, for the models that expose them.
    pub fn diagnostics(&self) -> Option<&FitDiagnostics> {
        match self {
            TrainedModel::LogisticRegression(m) => Some(&m.diagnostics),
            _ => None,
        }
    }
}

// Seed streams used inside training.
const STREAM_FOLDS: u64 = 0x11;
const STREAM_CV_FIT: u64 = 0x12;
const STREAM_FINAL_FIT: u64 = 0x13;

/// Train a model, selecting hyperparameters by k-fold cross-validation.
///
/// For every grid point the mean CV accuracy (at the 0.5 cutoff) is computed,
/// the best point (ties broken by first grid order) is refit on the full
/// training set, and the refit model is returned. Singleton grids skip the
/// CV passes, which is observationally equivalent. Deterministic under the
/// seed.
pub fn train(
    spec: &ModelSpec,
    train: &Dataset,
    folds: usize,
    seed: Seed,
) -> Result<TrainedModel, ModelError> {
    spec.validate()?;
    let positives = train.positives();
    let negatives = train.negatives();
    if positives == 0 || negatives == 0 {
        return Err(ModelError::SingleClass { positives, negatives });
    }

    let x = train.features();
    let y = train.labels();
    let chosen = if spec.grid_len() == 1 {
        0
    } else {
        let folds = kfold_indices(train.n(), folds, seed.derive(STREAM_FOLDS))?;
        let mut best_point = 0;
        let mut best_accuracy = f64::NEG_INFINITY;
        for point in 0..spec.grid_len() {
            let mut accuracy_sum = 0.0;
            for (f, fold) in folds.iter().enumerate() {
                let mut in_fold = alloc::vec![false; train.n()];
                for &i in fold {
                    in_fold[i] = true;
                }
                let fit_rows: Vec<usize> = (0..train.n()).filter(|&i| !in_fold[i]).collect();
                let fit_x = x.select_rows(&fit_rows);
                let fit_y: Vec<u8> = fit_rows.iter().map(|&i| y[i]).collect();
                let fit_seed =
                    seed.derive(STREAM_CV_FIT).derive(point as u64).derive(f as u64);
                let model = if fit_y.iter().all(|&l| l == 1) || fit_y.iter().all(|&l| l == 0) {
                    // A fold whose training part is single-class cannot fit
                    // most learners; score it with the prior-only guesser.
                    let prevalence =
                        fit_y.iter().filter(|&&l| l == 1).count() as f64 / fit_y.len() as f64;
                    TrainedModel::RandomGuess(RandomGuessModel::new(
                        x.cols(),
                        prevalence,
                        fit_seed,
                    ))
                } else {
                    spec.fit_grid_point(point, &fit_x, &fit_y, fit_seed)?
                };
                let val_x = x.select_rows(fold);
                let scores = model.predict_proba(&val_x)?;
                let correct = fold
                    .iter()
                    .zip(&scores)
                    .filter(|(&i, &s)| (s >= 0.5) == (y[i] == 1))
                    .count();
                accuracy_sum += correct as f64 / fold.len() as f64;
            }
            let mean_accuracy = accuracy_sum / folds.len() as f64;
            if mean_accuracy > best_accuracy {
                best_accuracy = mean_accuracy;
                best_point = point;
            }
        }
        best_point
    };

    spec.fit_grid_point(chosen, x, y, seed.derive(STREAM_FINAL_FIT))
}

/// Per-feature location/scale statistics fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Standardizer {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Standardizer {
    /// Fit means and standard deviations column-wise; constant columns get
    /// scale 1 so they pass through unchanged.
    pub(crate) fn fit(x: &Matrix) -> Standardizer {
        #[cfg(not(feature = "std"))]
        use num_traits::Float;
        let n = x.rows() as f64;
        let d = x.cols();
        let mut means = alloc::vec![0.0; d];
        for r in 0..x.rows() {
            for (c, m) in means.iter_mut().enumerate() {
                *m += x.get(r, c);
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        let mut scales = alloc::vec![0.0; d];
        for r in 0..x.rows() {
            for c in 0..d {
                let dev = x.get(r, c) - means[c];
                scales[c] += dev * dev;
            }
        }
        for s in scales.iter_mut() {
            *s = if n > 1.0 { (*s / (n - 1.0)).sqrt() } else { 0.0 };
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, scales }
    }

    pub(crate) fn width(&self) -> usize {
        self.means.len()
    }

    /// Standardize a whole matrix.
    pub(crate) fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                out.set(r, c, (x.get(r, c) - self.means[c]) / self.scales[c]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_dataset, train_test_split};
    use crate::roc::{auc_mann_whitney, ScoredPredictions};

    fn holdout_auc(spec: &ModelSpec, separation: f64, seed: u64) -> f64 {
        let ds = synth_dataset(600, 4, 0.45, separation, Seed(seed)).unwrap();
        let (train_ds, test_ds) = train_test_split(&ds, 0.25, Seed(seed + 1)).unwrap();
        let model = train(spec, &train_ds, 5, Seed(seed + 2)).unwrap();
        let scores = model.predict_proba(test_ds.features()).unwrap();
        let sp = ScoredPredictions::new(scores, test_ds.labels().to_vec()).unwrap();
        auc_mann_whitney(&sp).unwrap()
    }

    #[test]
    fn every_model_beats_chance_on_separated_data() {
        for kind in ModelKind::all() {
            if kind == ModelKind::RandomGuess {
                continue;
            }
            let auc = holdout_auc(&ModelSpec::default_for(kind), 1.5, 77);
            assert!(auc > 0.8, "{kind:?} AUC {auc} too low");
        }
    }

    #[test]
    fn logreg_separable_accuracy() {
        let ds = synth_dataset(400, 2, 0.5, 3.0, Seed(3)).unwrap();
        let (train_ds, test_ds) = train_test_split(&ds, 0.25, Seed(4)).unwrap();
        let model =
            train(&ModelSpec::LogisticRegression { l2: 1e-6 }, &train_ds, 5, Seed(5)).unwrap();
        let scores = model.predict_proba(test_ds.features()).unwrap();
        let correct = scores
            .iter()
            .zip(test_ds.labels())
            .filter(|(&s, &y)| (s >= 0.5) == (y == 1))
            .count();
        let accuracy = correct as f64 / scores.len() as f64;
        assert!(accuracy > 0.9, "accuracy {accuracy}");
    }

    #[test]
    fn knn_singleton_grid_memorizes_training_points() {
        let ds = synth_dataset(60, 3, 0.4, 1.0, Seed(9)).unwrap();
        let model =
            train(&ModelSpec::Knn { neighbor_grid: alloc::vec![1] }, &ds, 5, Seed(10)).unwrap();
        let scores = model.predict_proba(ds.features()).unwrap();
        for (s, &y) in scores.iter().zip(ds.labels()) {
            assert_eq!(*s >= 0.5, y == 1);
        }
    }

    #[test]
    fn deterministic_scores_for_every_kind() {
        let ds = synth_dataset(240, 4, 0.4, 0.8, Seed(31)).unwrap();
        let (train_ds, test_ds) = train_test_split(&ds, 0.25, Seed(32)).unwrap();
        for spec in ModelSpec::defaults() {
            let a = train(&spec, &train_ds, 4, Seed(33)).unwrap();
            let b = train(&spec, &train_ds, 4, Seed(33)).unwrap();
            let sa = a.predict_proba(test_ds.features()).unwrap();
            let sb = b.predict_proba(test_ds.features()).unwrap();
            assert_eq!(sa, sb, "nondeterministic {:?}", spec.kind());
        }
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let ds = synth_dataset(150, 3, 0.3, 0.5, Seed(41)).unwrap();
        let (train_ds, test_ds) = train_test_split(&ds, 0.3, Seed(42)).unwrap();
        for spec in ModelSpec::defaults() {
            let model = train(&spec, &train_ds, 3, Seed(43)).unwrap();
            for s in model.predict_proba(test_ds.features()).unwrap() {
                assert!((0.0..=1.0).contains(&s), "{:?} score {s}", spec.kind());
            }
        }
    }

    #[test]
    fn train_rejects_single_class() {
        let ds = synth_dataset(50, 2, 0.5, 1.0, Seed(1)).unwrap();
        let pos_rows: Vec<usize> = (0..ds.n()).filter(|&i| ds.labels()[i] == 1).collect();
        let single = ds.subset(&pos_rows, "pos-only").unwrap();
        for spec in ModelSpec::defaults() {
            assert!(matches!(
                train(&spec, &single, 5, Seed(2)),
                Err(ModelError::SingleClass { .. })
            ));
        }
    }

    #[test]
    fn train_rejects_bad_grids() {
        let ds = synth_dataset(50, 2, 0.5, 1.0, Seed(1)).unwrap();
        let bad = ModelSpec::Knn { neighbor_grid: alloc::vec![] };
        assert!(matches!(train(&bad, &ds, 5, Seed(2)), Err(ModelError::InvalidGrid { .. })));
        let bad = ModelSpec::DecisionTree { depth_grid: alloc::vec![0], min_leaf: 5 };
        assert!(matches!(train(&bad, &ds, 5, Seed(2)), Err(ModelError::InvalidGrid { .. })));
    }

    #[test]
    fn predict_rejects_width_mismatch() {
        let ds = synth_dataset(50, 3, 0.5, 1.0, Seed(1)).unwrap();
        let model = train(&ModelSpec::default_for(ModelKind::Lda), &ds, 5, Seed(2)).unwrap();
        let narrow = Matrix::zeros(4, 2);
        assert!(matches!(
            model.predict_proba(&narrow),
            Err(ModelError::WidthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn cv_prefers_better_grid_point() {
        // k = 1 overfits relative to moderate k on noisy Gaussians; CV must
        // not pick a catastrophically bad point. Just assert the selection
        // machinery runs and the chosen model scores above chance.
        let spec = ModelSpec::Knn { neighbor_grid: alloc::vec![1, 15] };
        let auc = holdout_auc(&spec, 1.0, 55);
        assert!(auc > 0.7, "AUC {auc}");
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let x = Matrix::from_rows(&[&[1.0, 5.0], &[2.0, 5.0], &[3.0, 5.0]]);
        let s = Standardizer::fit(&x);
        let t = s.transform(&x);
        assert!((t.get(0, 0) + 1.0).abs() < 1e-12);
        assert_eq!(t.get(0, 1), 0.0);
        assert_eq!(t.get(2, 1), 0.0);
    }
}
