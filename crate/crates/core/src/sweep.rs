//! The prevalence-sweep engine: build a chain of constant-n datasets by
//! repeated class swaps, run the full train/evaluate protocol on each, and
//! emit long-format evaluation records.
//!
//! The chain is built sequentially (each iterate derives from its
//! predecessor) but evaluation of the iterates is independent given the
//! chain, so callers may evaluate them in any order or in parallel and then
//! [`assemble`] the results; the output is identical regardless of
//! scheduling. Early stopping is applied during assembly: a phase ends after
//! the first iteration where the champion model's test TPR (prevalence
//! falling) or TNR (prevalence rising) drops below its floor.

use alloc::vec::Vec;

use thiserror::Error;

use crate::dataset::{swap_step, train_test_split, DataError, Dataset, SwapDirection};
use crate::metrics::{all_metrics, Beta, MetricId};
use crate::models::{random_guess_scores, train, ModelError, ModelKind, ModelSpec};
use crate::roc::{apply_threshold, auc_mann_whitney, threshold_confusions, RocError, ScoredPredictions};
use crate::seed::Seed;

const STREAM_SWAP: u64 = 0x31;
const STREAM_SPLIT: u64 = 0x32;
const STREAM_MODEL: u64 = 0x33;

/// Which thresholds to evaluate confusion-matrix metrics at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Only the 0.5 cutoff.
    CutoffOnly,
    /// The 0.5 cutoff plus every distinct score threshold (and the sentinel
    /// above the maximum score).
    FullGrid,
}

/// Configuration of a sweep run.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Cases swapped per iteration.
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
    /// Cross-validation folds for hyperparameter selection.
    pub cv_folds: usize,
    /// Models to train and evaluate.
    pub models: Vec<ModelSpec>,
    /// F-beta weights to evaluate.
    pub betas: Vec<Beta>,
    /// Root of all randomness in the run.
    pub seed: Seed,
    /// Threshold coverage of the emitted records.
    pub threshold_mode: ThresholdMode,
    /// Model whose test TPR/TNR drives early stopping.
    pub champion: ModelKind,
}

impl SweepConfig {
    /// The default protocol: steps of 30, caps 76 down / 79 up, stop floors
    /// 0.01, an 80/20 split, 10-fold CV, all seven models, betas {0.5, 2},
    /// cutoff-only thresholds, gradient boosting as the stop champion.
    pub fn new(seed: Seed) -> SweepConfig {
        SweepConfig {
            step: 30,
            max_down: 76,
            max_up: 79,
            stop_tpr_low: 0.01,
            stop_tnr_low: 0.01,
            test_fraction: 0.2,
            cv_folds: 10,
            models: ModelSpec::defaults(),
            betas: crate::metrics::default_betas(),
            seed,
            threshold_mode: ThresholdMode::CutoffOnly,
            champion: ModelKind::GradientBoosting,
        }
    }

    fn validate(&self) -> Result<(), SweepError> {
        if self.step == 0 {
            return Err(SweepError::InvalidConfig("step must be at least 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(SweepError::InvalidConfig("test_fraction must be inside (0, 1)"));
        }
        if self.cv_folds < 2 {
            return Err(SweepError::InvalidConfig("cv_folds must be at least 2"));
        }
        if self.models.is_empty() {
            return Err(SweepError::InvalidConfig("at least one model is required"));
        }
        Ok(())
    }
}

/// Errors from sweep execution.
#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    /// A configuration field is out of range.
    #[error("invalid sweep config: {0}")]
    InvalidConfig(&'static str),
    /// Dataset-level failure.
    #[error(transparent)]
    Data(#[from] DataError),
    /// Model-level failure.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Score-level failure.
    #[error(transparent)]
    Roc(#[from] RocError),
    /// Assembly received evaluations whose iterations do not match the chain.
    #[error("evaluations do not cover the dataset chain (missing iteration {missing})")]
    IncompleteEvaluations {
        /// First chain iteration with no evaluation.
        missing: i64,
    },
}

/// Threshold tag of an evaluation record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Score-based metric: all thresholds at once (AUC).
    All,
    /// Confusion-matrix metric at a specific cutoff.
    Value(f64),
}

impl core::fmt::Display for Threshold {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Threshold::All => write!(f, "ALL"),
            Threshold::Value(t) => write!(f, "{t}"),
        }
    }
}

/// One (iteration, model, metric, threshold) observation; the long-format
/// atom every analysis consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    /// Signed iteration: negative in the prevalence-reducing phase, 0 for
    /// the original dataset, positive in the increasing phase.
    pub iteration: i64,
    /// Prevalence of this iteration's test split.
    pub test_prevalence: f64,
    /// Model evaluated.
    pub model: ModelKind,
    /// Metric evaluated.
    pub metric: MetricId,
    /// Threshold the metric was computed at (ALL for AUC).
    pub threshold: Threshold,
    /// Metric value (NaN marks a flagged-undefined evaluation).
    pub value: f64,
}

/// Why a chain phase stopped growing during construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStop {
    /// The configured iteration cap was reached.
    CapReached,
    /// The shrinking class ran out of rows to drop.
    ClassExhausted {
        /// Cases requested per step.
        requested: usize,
        /// Cases available.
        available: usize,
    },
}

/// One dataset in the chain.
#[derive(Debug, Clone)]
pub struct ChainEntry {
    /// Signed iteration index.
    pub iteration: i64,
    /// The resampled dataset.
    pub dataset: Dataset,
}

/// The precomputed dataset chain.
#[derive(Debug, Clone)]
pub struct DatasetChain {
    /// Entries ordered by iteration, from most-reduced to most-increased.
    pub entries: Vec<ChainEntry>,
    /// Why the reducing phase stopped being built.
    pub down_stop: ChainStop,
    /// Why the increasing phase stopped being built.
    pub up_stop: ChainStop,
}

/// Build the dataset chain: iteration 0 is the input; negative iterations
/// chain [`swap_step`] reductions, positive iterations chain increases. Every
/// entry has exactly the original row count. A phase that exhausts its class
/// before the cap is truncated with the reason recorded, not failed.
pub fn dataset_chain(ds: &Dataset, cfg: &SweepConfig) -> Result<DatasetChain, SweepError> {
    cfg.validate()?;
    let mut entries = Vec::with_capacity(cfg.max_down + cfg.max_up + 1);
    entries.push(ChainEntry { iteration: 0, dataset: ds.clone() });

    let mut build_phase = |direction: SwapDirection, cap: usize| -> Result<ChainStop, SweepError> {
        let mut current = ds.clone();
        for step_index in 1..=cap {
            let iteration = match direction {
                SwapDirection::ReducePrevalence => -(step_index as i64),
                SwapDirection::IncreasePrevalence => step_index as i64,
            };
            let seed = cfg.seed.derive_signed(STREAM_SWAP, iteration);
            match swap_step(&current, cfg.step, direction, seed) {
                Ok(next) => {
                    entries.push(ChainEntry { iteration, dataset: next.clone() });
                    current = next;
                }
                Err(DataError::ClassExhausted { requested, available }) => {
                    return Ok(ChainStop::ClassExhausted { requested, available });
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(ChainStop::CapReached)
    };

    let down_stop = build_phase(SwapDirection::ReducePrevalence, cfg.max_down)?;
    let up_stop = build_phase(SwapDirection::IncreasePrevalence, cfg.max_up)?;
    entries.sort_by_key(|e| e.iteration);
    Ok(DatasetChain { entries, down_stop, up_stop })
}

/// Everything produced by evaluating one chain entry.
#[derive(Debug, Clone)]
pub struct IterationEval {
    /// Signed iteration index.
    pub iteration: i64,
    /// Prevalence of the test split.
    pub test_prevalence: f64,
    /// Champion model's test TPR at the 0.5 cutoff.
    pub champion_tpr: f64,
    /// Champion model's test TNR at the 0.5 cutoff.
    pub champion_tnr: f64,
    /// All records for this iteration.
    pub records: Vec<EvalRecord>,
}

/// Run the full per-iteration protocol on one chain entry: split, train
/// every model with CV, score the test set, and emit metric records at the
/// configured thresholds plus one AUC record per model.
pub fn evaluate_iteration(entry: &ChainEntry, cfg: &SweepConfig) -> Result<IterationEval, SweepError> {
    let iteration = entry.iteration;
    let split_seed = cfg.seed.derive_signed(STREAM_SPLIT, iteration);
    let (train_ds, test_ds) = train_test_split(&entry.dataset, cfg.test_fraction, split_seed)?;
    let test_prevalence = test_ds.prevalence();
    let n_test = test_ds.n();

    let mut records = Vec::new();
    let mut champion_tpr = f64::NAN;
    let mut champion_tnr = f64::NAN;
    let champion = if cfg.models.iter().any(|s| s.kind() == cfg.champion) {
        cfg.champion
    } else {
        cfg.models[0].kind()
    };

    for (model_index, spec) in cfg.models.iter().enumerate() {
        let kind = spec.kind();
        let model_seed =
            cfg.seed.derive_signed(STREAM_MODEL, iteration).derive(model_index as u64);
        let scores = if kind == ModelKind::RandomGuess {
            // The baseline guesses from the prevalence of the test set
            // itself, as the protocol prescribes.
            random_guess_scores(test_prevalence, n_test, model_seed)
        } else {
            let model = train(spec, &train_ds, cfg.cv_folds, model_seed)?;
            model.predict_proba(test_ds.features())?
        };
        let sp = ScoredPredictions::new(scores, test_ds.labels().to_vec())?;

        let cutoff_cm = apply_threshold(&sp, 0.5);
        if kind == champion {
            champion_tpr = cutoff_cm.tpr();
            champion_tnr = cutoff_cm.tnr();
        }

        let grid: Vec<(f64, crate::metrics::ConfusionMatrix)> = match cfg.threshold_mode {
            ThresholdMode::CutoffOnly => alloc::vec![(0.5, cutoff_cm)],
            ThresholdMode::FullGrid => {
                // All score thresholds, with the 0.5 cutoff spliced in so it
                // is always part of the grid exactly once.
                let mut grid = threshold_confusions(&sp);
                if !grid.iter().any(|&(t, _)| t == 0.5) {
                    let at = grid.partition_point(|&(t, _)| t > 0.5);
                    grid.insert(at, (0.5, cutoff_cm));
                }
                grid
            }
        };
        for (threshold, cm) in &grid {
            for (metric, value) in all_metrics(cm, &cfg.betas) {
                records.push(EvalRecord {
                    iteration,
                    test_prevalence,
                    model: kind,
                    metric,
                    threshold: Threshold::Value(*threshold),
                    value,
                });
            }
        }

        // Single-class test splits leave AUC undefined; keep the record and
        // flag it with NaN so completeness holds.
        let auc = auc_mann_whitney(&sp).unwrap_or(f64::NAN);
        records.push(EvalRecord {
            iteration,
            test_prevalence,
            model: kind,
            metric: MetricId::Auc,
            threshold: Threshold::All,
            value: auc,
        });
    }

    Ok(IterationEval { iteration, test_prevalence, champion_tpr, champion_tnr, records })
}

/// Why a phase's evaluation ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseStop {
    /// Ran through every built iteration of the phase.
    ChainEnd(ChainStop),
    /// The champion's TPR fell below the floor (reducing phase).
    TprFloor {
        /// Observed TPR at the stopping iteration.
        observed: f64,
    },
    /// The champion's TNR fell below the floor (increasing phase).
    TnrFloor {
        /// Observed TNR at the stopping iteration.
        observed: f64,
    },
}

/// Summary of one executed phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOutcome {
    /// Iterations with emitted records (excluding iteration 0).
    pub executed: usize,
    /// Why the phase ended.
    pub stop: PhaseStop,
}

/// Per-iteration summary retained in the sweep output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationSummary {
    /// Signed iteration index.
    pub iteration: i64,
    /// Prevalence of the test split.
    pub test_prevalence: f64,
    /// Champion test TPR at 0.5.
    pub champion_tpr: f64,
    /// Champion test TNR at 0.5.
    pub champion_tnr: f64,
}

/// A finished sweep.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    /// All records of the executed iterations, ordered by iteration.
    pub records: Vec<EvalRecord>,
    /// Summaries of the executed iterations, ordered by iteration.
    pub iterations: Vec<IterationSummary>,
    /// Outcome of the prevalence-reducing phase.
    pub down: PhaseOutcome,
    /// Outcome of the prevalence-increasing phase.
    pub up: PhaseOutcome,
}

/// Combine per-iteration evaluations into the final output, applying the
/// early-stop rule phase by phase. Evaluations may arrive in any order (they
/// are matched to the chain by iteration index); the result is identical
/// regardless of the order they were computed in.
pub fn assemble(
    chain: &DatasetChain,
    evals: Vec<IterationEval>,
    cfg: &SweepConfig,
) -> Result<SweepOutput, SweepError> {
    let mut evals = evals;
    evals.sort_by_key(|e| e.iteration);
    for entry in &chain.entries {
        if evals.binary_search_by_key(&entry.iteration, |e| e.iteration).is_err() {
            return Err(SweepError::IncompleteEvaluations { missing: entry.iteration });
        }
    }
    let find = |iteration: i64| -> &IterationEval {
        let at = evals.binary_search_by_key(&iteration, |e| e.iteration).unwrap();
        &evals[at]
    };

    let max_down = chain.entries.iter().filter(|e| e.iteration < 0).count();
    let max_up = chain.entries.iter().filter(|e| e.iteration > 0).count();

    // Walk each phase outward from the original dataset, keeping records up
    // to and including the iteration that trips the stop rule.
    let mut kept: Vec<&IterationEval> = alloc::vec![find(0)];
    let mut down = PhaseOutcome { executed: 0, stop: PhaseStop::ChainEnd(chain.down_stop) };
    for i in 1..=max_down {
        let eval = find(-(i as i64));
        kept.push(eval);
        down.executed = i;
        if eval.champion_tpr < cfg.stop_tpr_low {
            down.stop = PhaseStop::TprFloor { observed: eval.champion_tpr };
            break;
        }
    }
    let mut up = PhaseOutcome { executed: 0, stop: PhaseStop::ChainEnd(chain.up_stop) };
    for i in 1..=max_up {
        let eval = find(i as i64);
        kept.push(eval);
        up.executed = i;
        if eval.champion_tnr < cfg.stop_tnr_low {
            up.stop = PhaseStop::TnrFloor { observed: eval.champion_tnr };
            break;
        }
    }

    kept.sort_by_key(|e| e.iteration);
    let iterations = kept
        .iter()
        .map(|e| IterationSummary {
            iteration: e.iteration,
            test_prevalence: e.test_prevalence,
            champion_tpr: e.champion_tpr,
            champion_tnr: e.champion_tnr,
        })
        .collect();
    let records = kept.iter().flat_map(|e| e.records.iter().cloned()).collect();
    Ok(SweepOutput { records, iterations, down, up })
}

/// Build the chain, evaluate every iteration sequentially, and assemble.
pub fn run_sweep(ds: &Dataset, cfg: &SweepConfig) -> Result<SweepOutput, SweepError> {
    let chain = dataset_chain(ds, cfg)?;
    let evals: Result<Vec<IterationEval>, SweepError> =
        chain.entries.iter().map(|entry| evaluate_iteration(entry, cfg)).collect();
    assemble(&chain, evals?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_dataset;

    /// Small, fast config for protocol tests.
    fn small_config(seed: u64) -> SweepConfig {
        let mut cfg = SweepConfig::new(Seed(seed));
        cfg.step = 10;
        cfg.max_down = 4;
        cfg.max_up = 3;
        cfg.cv_folds = 3;
        cfg.models = alloc::vec![
            ModelSpec::LogisticRegression { l2: 1e-6 },
            ModelSpec::RandomGuess,
        ];
        cfg.champion = ModelKind::LogisticRegression;
        cfg
    }

    #[test]
    fn chain_preserves_n_and_steps_prevalence() {
        let ds = synth_dataset(400, 3, 0.5, 1.0, Seed(2)).unwrap();
        let cfg = small_config(7);
        let chain = dataset_chain(&ds, &cfg).unwrap();
        assert_eq!(chain.entries.len(), 8);
        for entry in &chain.entries {
            assert_eq!(entry.dataset.n(), 400);
            let expected_pos = (200i64 + entry.iteration * 10) as usize;
            assert_eq!(entry.dataset.positives(), expected_pos, "iteration {}", entry.iteration);
        }
        // Prevalence strictly increases along the chain ordering.
        for w in chain.entries.windows(2) {
            assert!(w[1].dataset.prevalence() > w[0].dataset.prevalence());
        }
        assert_eq!(chain.down_stop, ChainStop::CapReached);
        assert_eq!(chain.up_stop, ChainStop::CapReached);
    }

    #[test]
    fn chain_truncates_on_class_exhaustion() {
        // 40 positives, step 10: only 3 reducing steps fit (the fourth would
        // need strictly more than 10 positives remaining).
        let ds = synth_dataset(100, 2, 0.4, 1.0, Seed(3)).unwrap();
        let mut cfg = small_config(7);
        cfg.max_down = 50;
        cfg.max_up = 0;
        let chain = dataset_chain(&ds, &cfg).unwrap();
        assert_eq!(
            chain.down_stop,
            ChainStop::ClassExhausted { requested: 10, available: 10 }
        );
        assert_eq!(chain.entries.first().unwrap().dataset.positives(), 10);
    }

    #[test]
    fn chain_is_deterministic() {
        let ds = synth_dataset(300, 2, 0.45, 1.0, Seed(4)).unwrap();
        let cfg = small_config(11);
        let a = dataset_chain(&ds, &cfg).unwrap();
        let b = dataset_chain(&ds, &cfg).unwrap();
        let counts = |c: &DatasetChain| -> Vec<usize> {
            c.entries.iter().map(|e| e.dataset.positives()).collect()
        };
        assert_eq!(counts(&a), counts(&b));
        assert_eq!(a.entries[0].dataset, b.entries[0].dataset);
    }

    #[test]
    fn zero_caps_evaluate_only_the_original() {
        let ds = synth_dataset(200, 2, 0.5, 1.0, Seed(5)).unwrap();
        let mut cfg = small_config(13);
        cfg.max_down = 0;
        cfg.max_up = 0;
        let out = run_sweep(&ds, &cfg).unwrap();
        assert_eq!(out.iterations.len(), 1);
        assert_eq!(out.iterations[0].iteration, 0);
        assert!(out.records.iter().all(|r| r.iteration == 0));
    }

    #[test]
    fn record_completeness_per_iteration_and_model() {
        let ds = synth_dataset(300, 3, 0.5, 1.0, Seed(6)).unwrap();
        let cfg = small_config(17);
        let out = run_sweep(&ds, &cfg).unwrap();
        let ids = MetricId::threshold_metrics(&cfg.betas);
        for summary in &out.iterations {
            for spec in &cfg.models {
                let kind = spec.kind();
                let auc_count = out
                    .records
                    .iter()
                    .filter(|r| {
                        r.iteration == summary.iteration
                            && r.model == kind
                            && r.metric == MetricId::Auc
                    })
                    .count();
                assert_eq!(auc_count, 1);
                for &id in &ids {
                    let count = out
                        .records
                        .iter()
                        .filter(|r| {
                            r.iteration == summary.iteration
                                && r.model == kind
                                && r.metric == id
                                && matches!(r.threshold, Threshold::Value(t) if t == 0.5)
                        })
                        .count();
                    assert_eq!(count, 1, "iteration {} {kind:?} {id:?}", summary.iteration);
                }
            }
        }
    }

    #[test]
    fn assembly_is_order_independent() {
        let ds = synth_dataset(250, 2, 0.5, 1.0, Seed(8)).unwrap();
        let cfg = small_config(19);
        let chain = dataset_chain(&ds, &cfg).unwrap();
        let forward: Vec<IterationEval> =
            chain.entries.iter().map(|e| evaluate_iteration(e, &cfg).unwrap()).collect();
        let mut backward: Vec<IterationEval> =
            chain.entries.iter().rev().map(|e| evaluate_iteration(e, &cfg).unwrap()).collect();
        backward.reverse(); // contents identical, computed in reverse order
        let a = assemble(&chain, forward, &cfg).unwrap();
        let b = assemble(&chain, backward, &cfg).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn assembly_detects_missing_iterations() {
        let ds = synth_dataset(250, 2, 0.5, 1.0, Seed(8)).unwrap();
        let cfg = small_config(19);
        let chain = dataset_chain(&ds, &cfg).unwrap();
        let mut evals: Vec<IterationEval> =
            chain.entries.iter().map(|e| evaluate_iteration(e, &cfg).unwrap()).collect();
        evals.pop();
        assert!(matches!(
            assemble(&chain, evals, &cfg),
            Err(SweepError::IncompleteEvaluations { .. })
        ));
    }

    #[test]
    fn full_grid_contains_cutoff_exactly_once() {
        let ds = synth_dataset(200, 2, 0.5, 1.2, Seed(9)).unwrap();
        let mut cfg = small_config(23);
        cfg.max_down = 0;
        cfg.max_up = 0;
        cfg.threshold_mode = ThresholdMode::FullGrid;
        let out = run_sweep(&ds, &cfg).unwrap();
        for spec in &cfg.models {
            let cutoff_records = out
                .records
                .iter()
                .filter(|r| {
                    r.model == spec.kind()
                        && r.metric == MetricId::Accuracy
                        && matches!(r.threshold, Threshold::Value(t) if t == 0.5)
                })
                .count();
            assert_eq!(cutoff_records, 1);
            // And the grid is bigger than just the cutoff.
            let grid_records = out
                .records
                .iter()
                .filter(|r| r.model == spec.kind() && r.metric == MetricId::Accuracy)
                .count();
            assert!(grid_records > 2, "grid has only {grid_records} thresholds");
        }
    }

    #[test]
    fn early_stop_cuts_the_reducing_phase() {
        let ds = synth_dataset(400, 3, 0.5, 1.0, Seed(10)).unwrap();
        let mut cfg = small_config(29);
        // An absurd floor trips immediately at the first reduced iteration.
        cfg.stop_tpr_low = 2.0;
        let out = run_sweep(&ds, &cfg).unwrap();
        assert_eq!(out.down.executed, 1);
        assert!(matches!(out.down.stop, PhaseStop::TprFloor { .. }));
        assert!(out.records.iter().all(|r| r.iteration >= -1));
        // The increasing phase is unaffected.
        assert_eq!(out.up.executed, 3);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let ds = synth_dataset(300, 3, 0.45, 1.0, Seed(12)).unwrap();
        let cfg = small_config(31);
        let a = run_sweep(&ds, &cfg).unwrap();
        let b = run_sweep(&ds, &cfg).unwrap();
        assert_eq!(a.records, b.records);
    }
}
