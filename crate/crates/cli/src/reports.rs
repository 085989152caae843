//! Report writers. Every output is a fixed-header CSV (or a small TOML-ish
//! manifest) rendered deterministically: identical inputs and seed give
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use prevsweep_core::analysis::{MetricTypeComparison, OlsFit, RankTable, VarianceReport};
use prevsweep_core::dataset::CorrelationMatrix;
use prevsweep_core::metrics::MetricId;
use prevsweep_core::models::ModelKind;
use prevsweep_core::sweep::{ChainStop, EvalRecord, PhaseStop, SweepOutput};

use crate::config::RunConfig;
use crate::io::{write_atomic, IoError};

/// Render a float the way all reports do: shortest round-trip decimal, with
/// NaN spelled `NaN`.
fn num(v: f64) -> String {
    format!("{v}")
}

/// `records.csv`: `iteration,test_prevalence,model,metric,threshold,value`.
pub fn write_records(records: &[EvalRecord], path: &Path) -> Result<(), IoError> {
    let mut text = String::with_capacity(records.len() * 48 + 64);
    text.push_str("iteration,test_prevalence,model,metric,threshold,value\n");
    for r in records {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            r.iteration,
            num(r.test_prevalence),
            r.model.name(),
            r.metric.name(),
            r.threshold,
            num(r.value)
        );
    }
    write_atomic(path, text.as_bytes())
}

/// `ranks.csv`: `iteration,metric,model,rank`. Models excluded from a cell
/// (undefined metric value) get an empty rank field.
pub fn write_ranks(table: &RankTable, path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str("iteration,metric,model,rank\n");
    for ((iteration, metric), outcome) in &table.entries {
        for (model, rank) in &outcome.ranks {
            let _ = writeln!(text, "{},{},{},{}", iteration, metric.name(), model.name(), num(*rank));
        }
        for model in &outcome.excluded {
            let _ = writeln!(text, "{},{},{},", iteration, metric.name(), model.name());
        }
    }
    write_atomic(path, text.as_bytes())
}

/// `rank_variance.csv`: variance of rank and of value across iterations per
/// (metric, model).
pub fn write_rank_variance(report: &VarianceReport, path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str("metric,model,rank_variance,value_variance,rank_observations,value_observations\n");
    for ((metric, model), entry) in &report.entries {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            metric.name(),
            model.name(),
            num(entry.rank_variance),
            num(entry.value_variance),
            entry.rank_observations,
            entry.value_observations
        );
    }
    write_atomic(path, text.as_bytes())
}

/// One expansion series: variance of the running threshold average per
/// threshold count, for one (model, metric) pair.
pub type SeriesRow = (ModelKind, MetricId, Vec<(usize, f64)>);
/// One regression of expansion variance on threshold count.
pub type FitRow = (ModelKind, MetricId, OlsFit);

/// `threshold_series.csv`: the variance-vs-threshold-count expansion series.
pub fn write_threshold_series(series: &[SeriesRow], path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str("model,metric,threshold_count,variance\n");
    for (model, metric, points) in series {
        for (count, variance) in points {
            let _ =
                writeln!(text, "{},{},{},{}", model.name(), metric.name(), count, num(*variance));
        }
    }
    write_atomic(path, text.as_bytes())
}

/// `ols.csv`: per (model, metric) regression of expansion variance on
/// threshold count.
pub fn write_ols(fits: &[FitRow], path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str(
        "model,metric,intercept,slope,se_intercept,se_slope,t_intercept,t_slope,p_intercept,p_slope,residual_variance,df_residual\n",
    );
    for (model, metric, fit) in fits {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            model.name(),
            metric.name(),
            num(fit.coefficients[0]),
            num(fit.coefficients[1]),
            num(fit.standard_errors[0]),
            num(fit.standard_errors[1]),
            num(fit.t_values[0]),
            num(fit.t_values[1]),
            num(fit.p_values[0]),
            num(fit.p_values[1]),
            num(fit.residual_variance),
            fit.df_residual
        );
    }
    write_atomic(path, text.as_bytes())
}

/// `tests.csv`: the variance-homogeneity test results.
pub fn write_tests(comparison: &MetricTypeComparison, path: &Path) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str("comparison,test,statistic,p_value,df1,df2\n");
    for result in [&comparison.f, &comparison.bartlett, &comparison.levene] {
        let _ = writeln!(
            text,
            "prevalence_sensitive_vs_stable_rank_spread,{},{},{},{},{}",
            result.test_name,
            num(result.statistic),
            num(result.p_value),
            num(result.df1),
            result.df2.map(num).unwrap_or_default()
        );
    }
    write_atomic(path, text.as_bytes())
}

/// `correlations.csv`: the lower triangle (plus diagonal) of every
/// iteration's feature/label correlation matrix, and the drift against
/// iteration 0.
pub fn write_correlations(
    matrices: &[(i64, CorrelationMatrix)],
    path: &Path,
) -> Result<(), IoError> {
    let baseline = matrices
        .iter()
        .find(|(iteration, _)| *iteration == 0)
        .map(|(_, m)| m.clone());
    let mut text = String::new();
    text.push_str("iteration,column_a,column_b,correlation,abs_drift_from_original\n");
    for (iteration, matrix) in matrices {
        for i in 0..matrix.dim() {
            for j in 0..=i {
                let drift = baseline
                    .as_ref()
                    .map(|b| num((matrix.get(i, j) - b.get(i, j)).abs()))
                    .unwrap_or_default();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{}",
                    iteration,
                    matrix.column_names[i],
                    matrix.column_names[j],
                    num(matrix.get(i, j)),
                    drift
                );
            }
        }
    }
    write_atomic(path, text.as_bytes())
}

fn chain_stop_text(stop: ChainStop) -> String {
    match stop {
        ChainStop::CapReached => "cap reached".into(),
        ChainStop::ClassExhausted { requested, available } => {
            format!("class exhausted (step {requested}, only {available} left)")
        }
    }
}

fn phase_stop_text(stop: PhaseStop) -> String {
    match stop {
        PhaseStop::ChainEnd(chain) => chain_stop_text(chain),
        PhaseStop::TprFloor { observed } => format!("champion TPR fell to {observed}"),
        PhaseStop::TnrFloor { observed } => format!("champion TNR fell to {observed}"),
    }
}

/// `manifest.toml`: seed, config echo, how each phase ended, and any
/// analyses that were skipped.
pub fn write_manifest(
    config: &RunConfig,
    output: &SweepOutput,
    max_correlation_drift: Option<f64>,
    notes: &[String],
    path: &Path,
) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str("# Run manifest\n\n[run]\n");
    let _ = writeln!(text, "seed = {}", config.seed);
    let _ = writeln!(text, "iterations = {}", output.iterations.len());
    let _ = writeln!(text, "down_iterations = {}", output.down.executed);
    let _ = writeln!(text, "up_iterations = {}", output.up.executed);
    let _ = writeln!(text, "down_stop = {:?}", phase_stop_text(output.down.stop));
    let _ = writeln!(text, "up_stop = {:?}", phase_stop_text(output.up.stop));
    if let (Some(first), Some(last)) = (output.iterations.first(), output.iterations.last()) {
        let _ = writeln!(text, "lowest_test_prevalence = {}", num(first.test_prevalence));
        let _ = writeln!(text, "highest_test_prevalence = {}", num(last.test_prevalence));
    }
    if let Some(drift) = max_correlation_drift {
        let _ = writeln!(text, "max_correlation_drift = {}", num(drift));
    }
    if !notes.is_empty() {
        let _ = writeln!(text, "notes = {notes:?}");
    }
    text.push_str("\n# Effective configuration\n[config]\n");
    let config_doc = toml::to_string_pretty(config).expect("config always serializes");
    for line in config_doc.lines() {
        let _ = writeln!(text, "{line}");
    }
    write_atomic(path, text.as_bytes())
}
