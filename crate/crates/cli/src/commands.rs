//! The three commands behind the CLI, exposed as library functions so they
//! can be driven directly from tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;

use prevsweep_core::analysis::{
    design_with_intercept, ols, rank_spread_tests, rank_table, rank_variance,
    threshold_expansion_series, AnalysisError,
};
use prevsweep_core::dataset::{correlation_matrix, synth_dataset, CorrelationMatrix, Dataset};
use prevsweep_core::metrics::{all_metrics, Beta, MetricId};
use prevsweep_core::models::ModelKind;
use prevsweep_core::roc::{apply_threshold, auc_mann_whitney};
use prevsweep_core::seed::Seed;
use prevsweep_core::sweep::{assemble, dataset_chain, evaluate_iteration, SweepOutput};

use crate::config::RunConfig;
use crate::io::{load_csv, load_predictions, write_atomic, write_dataset_csv};
use crate::reports;
use crate::summary::write_summary;

const STREAM_SYNTH: u64 = 0x41;

/// Compute every metric for a predictions CSV at the given threshold, plus
/// AUC over all thresholds. Returns the rendered `metric,value` report.
pub fn run_metrics(
    predictions: &Path,
    threshold: f64,
    betas: &[f64],
    out: Option<&Path>,
) -> anyhow::Result<String> {
    let betas: Vec<Beta> = betas
        .iter()
        .map(|&b| Beta::new(b))
        .collect::<Result<_, _>>()
        .context("invalid beta")?;
    let sp = load_predictions(predictions)?;
    let cm = apply_threshold(&sp, threshold);

    let mut text = String::from("metric,value\n");
    for (id, value) in all_metrics(&cm, &betas) {
        let _ = writeln!(text, "{},{}", id.name(), value);
    }
    // AUC is undefined for single-class inputs; report it as NaN.
    let auc = auc_mann_whitney(&sp).unwrap_or(f64::NAN);
    let _ = writeln!(text, "{},{}", MetricId::Auc.name(), auc);

    if let Some(path) = out {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(text)
}

/// Generate a synthetic dataset CSV.
pub fn run_synth(
    n: usize,
    features: usize,
    prevalence: f64,
    separation: f64,
    seed: u64,
    out: &Path,
) -> anyhow::Result<()> {
    let ds = synth_dataset(n, features, prevalence, separation, Seed(seed))?;
    write_dataset_csv(&ds, out)?;
    Ok(())
}

/// Paths written by a sweep run.
#[derive(Debug, Clone)]
pub struct SweepArtifacts {
    /// Output directory.
    pub out_dir: PathBuf,
    /// Every file written, relative to `out_dir`.
    pub files: Vec<&'static str>,
    /// Number of iterations that were evaluated and kept.
    pub iterations: usize,
}

/// Metrics whose value series track prevalence most strongly; first family
/// of the variance-homogeneity comparison.
pub fn prevalence_sensitive_metrics(betas: &[Beta]) -> Vec<MetricId> {
    let mut ids = vec![
        MetricId::F1,
        MetricId::JaccardIndex,
        MetricId::Tpr,
        MetricId::Tnr,
        MetricId::FowlkesMallows,
    ];
    ids.extend(betas.iter().map(|&b| MetricId::FBeta(b)));
    ids
}

/// Metrics largely stable against prevalence; second family of the
/// comparison.
pub fn prevalence_stable_metrics() -> Vec<MetricId> {
    vec![
        MetricId::BalancedAccuracy,
        MetricId::BookmakerInformedness,
        MetricId::CohensKappa,
        MetricId::Mcc,
        MetricId::Auc,
        MetricId::Markedness,
        MetricId::DiagOddsRatio,
    ]
}

/// Load the configured dataset, or generate the synthetic stand-in.
pub fn resolve_dataset(config: &RunConfig) -> anyhow::Result<Dataset> {
    match &config.dataset {
        Some(path) => Ok(load_csv(path, &config.label_column, &config.positive_label)?),
        None => Ok(synth_dataset(
            config.synth_n,
            config.synth_features,
            config.synth_prevalence,
            config.synth_separation,
            Seed(config.seed).derive(STREAM_SYNTH),
        )?),
    }
}

/// Run the full sweep protocol and write every report table into
/// `config.out_dir`. Iterations are evaluated in parallel; the emitted
/// files are byte-identical for identical config and seed regardless of
/// worker count.
pub fn run_sweep_command(config: &RunConfig) -> anyhow::Result<SweepArtifacts> {
    config.validate()?;
    let sweep_config = config.to_sweep_config();
    let ds = resolve_dataset(config)?;

    let chain = dataset_chain(&ds, &sweep_config)?;
    let evals = chain
        .entries
        .par_iter()
        .map(|entry| evaluate_iteration(entry, &sweep_config))
        .collect::<Result<Vec<_>, _>>()?;
    let output: SweepOutput = assemble(&chain, evals, &sweep_config)?;

    // Correlation diagnostics over the executed iterations.
    let executed: Vec<i64> = output.iterations.iter().map(|s| s.iteration).collect();
    let correlations: Vec<(i64, CorrelationMatrix)> = chain
        .entries
        .iter()
        .filter(|e| executed.binary_search(&e.iteration).is_ok())
        .map(|e| Ok((e.iteration, correlation_matrix(&e.dataset)?)))
        .collect::<anyhow::Result<_>>()?;
    let baseline = correlations.iter().find(|(i, _)| *i == 0).map(|(_, m)| m.clone());
    let max_drift = baseline.as_ref().map(|base| {
        correlations
            .iter()
            .map(|(_, m)| base.max_abs_diff(m))
            .fold(0.0f64, f64::max)
    });

    let dir = &config.out_dir;
    let mut files: Vec<&'static str> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    reports::write_records(&output.records, &dir.join("records.csv"))?;
    files.push("records.csv");
    reports::write_correlations(&correlations, &dir.join("correlations.csv"))?;
    files.push("correlations.csv");

    let table = rank_table(&output.records)?;
    reports::write_ranks(&table, &dir.join("ranks.csv"))?;
    files.push("ranks.csv");

    if output.iterations.len() >= 2 {
        let report = rank_variance(&output.records)?;
        reports::write_rank_variance(&report, &dir.join("rank_variance.csv"))?;
        files.push("rank_variance.csv");

        // A degenerate grouping (a model pinned at one rank for a whole
        // metric family) makes the homogeneity tests undefined; note it and
        // carry on rather than failing the run.
        match rank_spread_tests(
            &output.records,
            &prevalence_sensitive_metrics(&sweep_config.betas),
            &prevalence_stable_metrics(),
        ) {
            Ok(comparison) => {
                reports::write_tests(&comparison, &dir.join("tests.csv"))?;
                files.push("tests.csv");
            }
            Err(e) => notes.push(format!("variance-homogeneity tests skipped: {e}")),
        }

        if sweep_config.threshold_mode == prevsweep_core::sweep::ThresholdMode::FullGrid {
            let (series, fits) = expansion_analysis(&output, &sweep_config.betas)?;
            reports::write_threshold_series(&series, &dir.join("threshold_series.csv"))?;
            files.push("threshold_series.csv");
            reports::write_ols(&fits, &dir.join("ols.csv"))?;
            files.push("ols.csv");
        }
    } else {
        notes.push("variance tables skipped: only one iteration".to_string());
    }

    write_summary(&output, &sweep_config.betas, max_drift, &dir.join("summary.txt"))?;
    files.push("summary.txt");
    reports::write_manifest(config, &output, max_drift, &notes, &dir.join("manifest.toml"))?;
    files.push("manifest.toml");

    Ok(SweepArtifacts { out_dir: dir.clone(), files, iterations: output.iterations.len() })
}

use crate::reports::{FitRow, SeriesRow};

/// Threshold-expansion series and their variance-vs-count regressions for
/// every (model, non-count metric) pair, AUC included.
pub fn expansion_analysis(
    output: &SweepOutput,
    betas: &[Beta],
) -> Result<(Vec<SeriesRow>, Vec<FitRow>), AnalysisError> {
    let mut metric_ids: Vec<MetricId> = MetricId::threshold_metrics(betas)
        .into_iter()
        .filter(|id| {
            !matches!(
                id,
                MetricId::TruePositives
                    | MetricId::FalseNegatives
                    | MetricId::TrueNegatives
                    | MetricId::FalsePositives
            )
        })
        .collect();
    metric_ids.push(MetricId::Auc);

    let mut models: Vec<ModelKind> = output.records.iter().map(|r| r.model).collect();
    models.sort_unstable();
    models.dedup();

    let mut series = Vec::new();
    let mut fits = Vec::new();
    for &model in &models {
        for &metric in &metric_ids {
            let points = threshold_expansion_series(&output.records, model, metric)?;
            if points.len() > 2 {
                let counts: Vec<f64> = points.iter().map(|&(m, _)| m as f64).collect();
                let variances: Vec<f64> = points.iter().map(|&(_, v)| v).collect();
                if let Ok(fit) = ols(&variances, &design_with_intercept(&counts)) {
                    fits.push((model, metric, fit));
                }
            }
            series.push((model, metric, points));
        }
    }
    Ok((series, fits))
}

/// `config print-defaults`.
pub fn print_defaults() -> String {
    RunConfig::default_document()
}

/// Byte-compare helper for determinism checks.
pub fn files_identical(a: &Path, b: &Path) -> anyhow::Result<bool> {
    let left = std::fs::read(a).with_context(|| format!("reading {}", a.display()))?;
    let right = std::fs::read(b).with_context(|| format!("reading {}", b.display()))?;
    Ok(left == right)
}

/// Guard used by the binary: fail fast when a config file path is given but
/// unreadable, before touching anything else.
pub fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => {
            if !p.exists() {
                bail!("config file {} does not exist", p.display());
            }
            Ok(RunConfig::from_path(p)?)
        }
        None => Ok(RunConfig::default()),
    }
}
