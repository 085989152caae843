//! Run configuration: a flat TOML key-value document mirroring the sweep
//! settings plus dataset/output locations and model grid overrides. Unknown
//! keys are rejected, every default is documented by `print-defaults`, and
//! validation reports all problems at once, before any compute starts.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use prevsweep_core::metrics::Beta;
use prevsweep_core::models::{ModelKind, ModelSpec};
use prevsweep_core::seed::Seed;
use prevsweep_core::sweep::{SweepConfig, ThresholdMode};

/// Seed used when the config omits one; never wall-clock.
pub const DEFAULT_SEED: u64 = 42;

/// Errors from reading or validating a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// The file could not be read.
    #[error("cannot read config {path}: {source}")]
    Io {
        /// Path attempted.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// The document does not parse (includes unknown keys).
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    /// One or more fields are out of range; all problems are listed.
    #[error("invalid config values:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

/// Threshold coverage, spelled `cutoff` or `full` in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdModeSetting {
    /// Only the 0.5 cutoff.
    Cutoff,
    /// All score thresholds.
    Full,
}

impl From<ThresholdModeSetting> for ThresholdMode {
    fn from(s: ThresholdModeSetting) -> ThresholdMode {
        match s {
            ThresholdModeSetting::Cutoff => ThresholdMode::CutoffOnly,
            ThresholdModeSetting::Full => ThresholdMode::FullGrid,
        }
    }
}

/// The whole run configuration. Every field has a default; a config file
/// only overrides what it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Root seed for all randomness.
    pub seed: u64,
    /// Input dataset CSV; when absent a synthetic dataset is generated.
    pub dataset: Option<PathBuf>,
    /// Name of the label column in the dataset CSV.
    pub label_column: String,
    /// Label value mapped to the positive class.
    pub positive_label: String,
    /// Output directory for all reports.
    pub out_dir: PathBuf,
    /// Cases swapped per sweep iteration.
    pub step: usize,
    /// Cap on prevalence-reducing iterations.
    pub max_down: usize,
    /// Cap on prevalence-increasing iterations.
    pub max_up: usize,
    /// TPR floor ending the reducing phase.
    pub stop_tpr_low: f64,
    /// TNR floor ending the increasing phase.
    pub stop_tnr_low: f64,
    /// Held-out fraction per iteration.
    pub test_fraction: f64,
    /// Cross-validation folds.
    pub cv_folds: usize,
    /// `cutoff` or `full`.
    pub threshold_mode: ThresholdModeSetting,
    /// Models to run, by short name (GLM, LDA, KNN, TREE, RF, GBM,
    /// randomguess).
    pub models: Vec<String>,
    /// F-beta weights.
    pub betas: Vec<f64>,
    /// Model driving early stopping, by short name.
    pub champion: String,
    /// Rows of the synthetic dataset.
    pub synth_n: usize,
    /// Feature count of the synthetic dataset.
    pub synth_features: usize,
    /// Prevalence of the synthetic dataset.
    pub synth_prevalence: f64,
    /// Class-mean separation per coordinate of the synthetic dataset.
    pub synth_separation: f64,
    /// KNN neighbor-count grid.
    pub knn_grid: Vec<usize>,
    /// Decision-tree depth grid.
    pub tree_depth_grid: Vec<usize>,
    /// Minimum rows per tree leaf.
    pub tree_min_leaf: usize,
    /// Random-forest size grid.
    pub rf_trees_grid: Vec<usize>,
    /// Depth limit of forest trees.
    pub rf_max_depth: usize,
    /// Gradient-boosting round grid.
    pub gbm_rounds_grid: Vec<usize>,
    /// Gradient-boosting learning rate.
    pub gbm_learning_rate: f64,
    /// Logistic-regression L2 penalty.
    pub logreg_l2: f64,
    /// LDA ridge factor.
    pub lda_ridge: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            dataset: None,
            label_column: "label".into(),
            positive_label: "1".into(),
            out_dir: PathBuf::from("prevsweep-out"),
            step: 30,
            max_down: 76,
            max_up: 79,
            stop_tpr_low: 0.01,
            stop_tnr_low: 0.01,
            test_fraction: 0.2,
            cv_folds: 10,
            threshold_mode: ThresholdModeSetting::Cutoff,
            models: ModelKind::all().iter().map(|k| k.name().to_string()).collect(),
            betas: vec![0.5, 2.0],
            champion: "GBM".into(),
            synth_n: 3000,
            synth_features: 7,
            synth_prevalence: 0.45,
            synth_separation: 0.4,
            knn_grid: vec![5, 15, 31],
            tree_depth_grid: vec![3, 5],
            tree_min_leaf: 5,
            rf_trees_grid: vec![50],
            rf_max_depth: 8,
            gbm_rounds_grid: vec![100],
            gbm_learning_rate: 0.1,
            logreg_l2: 1e-6,
            lda_ridge: 1e-6,
        }
    }
}

impl RunConfig {
    /// Parse a TOML document; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Read and parse a config file.
    pub fn from_path(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        RunConfig::from_toml(&text)
    }

    /// The defaults rendered as a TOML document; `config print-defaults`.
    pub fn default_document() -> String {
        toml::to_string_pretty(&RunConfig::default()).expect("defaults always serialize")
    }

    /// Check every field, reporting all problems together.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.step == 0 {
            problems.push("step: must be at least 1".to_string());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            problems.push(format!(
                "test_fraction: {} is not inside (0, 1)",
                self.test_fraction
            ));
        }
        if self.cv_folds < 2 {
            problems.push(format!("cv_folds: {} is below 2", self.cv_folds));
        }
        if self.models.is_empty() {
            problems.push("models: at least one model is required".to_string());
        }
        for name in &self.models {
            if ModelKind::from_name(name).is_none() {
                problems.push(format!(
                    "models: unknown model {name:?} (expected GLM, LDA, KNN, TREE, RF, GBM or randomguess)"
                ));
            }
        }
        if ModelKind::from_name(&self.champion).is_none() {
            problems.push(format!("champion: unknown model {:?}", self.champion));
        }
        for &b in &self.betas {
            if Beta::new(b).is_err() {
                problems.push(format!("betas: {b} is not a positive finite value"));
            }
        }
        if self.dataset.is_none() {
            if self.synth_n < 10 {
                problems.push(format!("synth_n: {} is below 10", self.synth_n));
            }
            if self.synth_features == 0 {
                problems.push("synth_features: must be at least 1".to_string());
            }
            if !(self.synth_prevalence > 0.0 && self.synth_prevalence < 1.0) {
                problems.push(format!(
                    "synth_prevalence: {} is not inside (0, 1)",
                    self.synth_prevalence
                ));
            }
        }
        if self.knn_grid.is_empty() || self.knn_grid.contains(&0) {
            problems.push("knn_grid: must be non-empty with positive entries".to_string());
        }
        if self.tree_depth_grid.is_empty() || self.tree_depth_grid.contains(&0) {
            problems.push("tree_depth_grid: must be non-empty with positive entries".to_string());
        }
        if self.tree_min_leaf == 0 {
            problems.push("tree_min_leaf: must be at least 1".to_string());
        }
        if self.rf_trees_grid.is_empty() || self.rf_trees_grid.contains(&0) {
            problems.push("rf_trees_grid: must be non-empty with positive entries".to_string());
        }
        if self.rf_max_depth == 0 {
            problems.push("rf_max_depth: must be at least 1".to_string());
        }
        if self.gbm_rounds_grid.is_empty() || self.gbm_rounds_grid.contains(&0) {
            problems.push("gbm_rounds_grid: must be non-empty with positive entries".to_string());
        }
        if self.gbm_learning_rate.is_nan() || self.gbm_learning_rate <= 0.0 {
            problems.push(format!(
                "gbm_learning_rate: {} is not positive",
                self.gbm_learning_rate
            ));
        }
        if self.logreg_l2.is_nan() || self.logreg_l2 < 0.0 {
            problems.push(format!("logreg_l2: {} is negative", self.logreg_l2));
        }
        if self.lda_ridge.is_nan() || self.lda_ridge <= 0.0 {
            problems.push(format!("lda_ridge: {} is not positive", self.lda_ridge));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    /// The model spec for one named family, using this config's grids.
    pub fn model_spec(&self, kind: ModelKind) -> ModelSpec {
        match kind {
            ModelKind::LogisticRegression => ModelSpec::LogisticRegression { l2: self.logreg_l2 },
            ModelKind::Lda => ModelSpec::Lda { ridge: self.lda_ridge },
            ModelKind::Knn => ModelSpec::Knn { neighbor_grid: self.knn_grid.clone() },
            ModelKind::DecisionTree => ModelSpec::DecisionTree {
                depth_grid: self.tree_depth_grid.clone(),
                min_leaf: self.tree_min_leaf,
            },
            ModelKind::RandomForest => ModelSpec::RandomForest {
                n_trees_grid: self.rf_trees_grid.clone(),
                max_depth: self.rf_max_depth,
                min_leaf: self.tree_min_leaf,
            },
            ModelKind::GradientBoosting => ModelSpec::GradientBoosting {
                rounds_grid: self.gbm_rounds_grid.clone(),
                learning_rate: self.gbm_learning_rate,
                min_leaf: self.tree_min_leaf,
            },
            ModelKind::RandomGuess => ModelSpec::RandomGuess,
        }
    }

    /// Lower this config into the core sweep configuration. Call
    /// [`RunConfig::validate`] first; invalid names panic here.
    pub fn to_sweep_config(&self) -> SweepConfig {
        let models = self
            .models
            .iter()
            .map(|name| self.model_spec(ModelKind::from_name(name).expect("validated")))
            .collect();
        SweepConfig {
            step: self.step,
            max_down: self.max_down,
            max_up: self.max_up,
            stop_tpr_low: self.stop_tpr_low,
            stop_tnr_low: self.stop_tnr_low,
            test_fraction: self.test_fraction,
            cv_folds: self.cv_folds,
            models,
            betas: self.betas.iter().map(|&b| Beta::new(b).expect("validated")).collect(),
            seed: Seed(self.seed),
            threshold_mode: self.threshold_mode.into(),
            champion: ModelKind::from_name(&self.champion).expect("validated"),
        }
    }
}
