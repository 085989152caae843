//! Core library for studying how binary-classification evaluation metrics
//! behave as data prevalence changes while sample size and inter-variable
//! relationships stay constant.
//!
//! The crate provides:
//!
//! - [`metrics`]: all threshold-based confusion-matrix metrics in both count
//!   form and rate form (parameterized by sample size, prevalence, TPR, TNR);
//! - [`roc`]: threshold enumeration, ROC curves, and AUC by trapezoid rule
//!   and by the Mann-Whitney pairwise-ranking statistic;
//! - [`models`]: seven from-scratch classifiers (logistic regression, LDA,
//!   KNN, decision tree, random forest, gradient boosting, random guess)
//!   behind one probability-scoring interface with cross-validated
//!   hyperparameter selection;
//! - [`dataset`]: immutable datasets, deterministic splitting/resampling
//!   primitives, the constant-n class-swap step, a synthetic generator, and
//!   correlation diagnostics;
//! - [`sweep`]: the prevalence-sweep engine that chains swap steps, runs the
//!   full train/evaluate protocol per iteration, and emits long-format
//!   evaluation records;
//! - [`analysis`]: fractional ranking, rank/value variance reports,
//!   variance-homogeneity tests (F, Bartlett, Levene), threshold-expansion
//!   series, and OLS regression;
//! - [`dist`]: the special-function CDFs (chi-square, F, Student t) behind
//!   every p-value.
//!
//! Everything randomized is a pure function of its inputs and a [`seed::Seed`],
//! so identical seeds give bit-identical results and concurrent execution
//! cannot change outputs.
//!
//! The crate is `no_std`-compatible (requires `alloc`): build with
//! `--no-default-features` to drop the standard library; float math then
//! routes through `libm` via `num-traits`.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod dataset;
pub mod dist;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod roc;
pub mod seed;
pub mod sweep;

pub use dataset::Dataset;
pub use metrics::{ConfusionMatrix, MetricId, RateQuad};
pub use roc::ScoredPredictions;
pub use seed::Seed;
