//! The human-readable run summary, including the informational behavioral
//! classification of each metric against prevalence.
//!
//! Classification heuristic (informational only, never asserted): fit a
//! quadratic OLS of the metric value on test prevalence for each trained
//! model, evaluate the fit at the prevalence extremes and midpoint, and
//! read off the shape: low R-squared means prevalence-independent, a
//! midpoint above (below) both ends means concave (convex), anything else
//! is monotone in the sign of end-to-end change. Models vote; the majority
//! label wins, with `mixed` for splits. The random-guess baseline does not
//! vote.

use std::fmt::Write as _;
use std::path::Path;

use prevsweep_core::analysis::{ols, sample_variance, OlsFit};
use prevsweep_core::linalg::Matrix;
use prevsweep_core::metrics::{Beta, MetricId};
use prevsweep_core::models::ModelKind;
use prevsweep_core::sweep::{EvalRecord, SweepOutput, Threshold};

use crate::io::{write_atomic, IoError};

/// Behavioral class of a metric with respect to prevalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    /// Value rises as prevalence rises.
    MonotoneIncreasing,
    /// Value falls as prevalence rises.
    MonotoneDecreasing,
    /// Higher near balanced prevalence than at either extreme.
    Concave,
    /// Lower near balanced prevalence than at either extreme.
    Convex,
    /// No meaningful dependence on prevalence.
    PrevalenceIndependent,
    /// Models disagree.
    Mixed,
}

impl Behavior {
    fn label(self) -> &'static str {
        match self {
            Behavior::MonotoneIncreasing => "monotone-increasing",
            Behavior::MonotoneDecreasing => "monotone-decreasing",
            Behavior::Concave => "concave",
            Behavior::Convex => "convex",
            Behavior::PrevalenceIndependent => "prevalence-independent",
            Behavior::Mixed => "mixed",
        }
    }
}

/// Quadratic design matrix [1, phi, phi^2].
fn quadratic_design(phis: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(phis.len(), 3);
    for (i, &phi) in phis.iter().enumerate() {
        m.set(i, 0, 1.0);
        m.set(i, 1, phi);
        m.set(i, 2, phi * phi);
    }
    m
}

fn classify_one(phis: &[f64], values: &[f64]) -> Option<Behavior> {
    if phis.len() < 5 {
        return None;
    }
    let fit: OlsFit = ols(values, &quadratic_design(phis)).ok()?;
    let total_variance = sample_variance(values)?;
    if total_variance == 0.0 {
        return Some(Behavior::PrevalenceIndependent);
    }
    let r_squared = 1.0 - fit.residual_variance * (phis.len() - 3) as f64
        / (total_variance * (phis.len() - 1) as f64);
    if r_squared < 0.15 {
        return Some(Behavior::PrevalenceIndependent);
    }
    let lo = phis.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let eval = |phi: f64| fit.coefficients[0] + fit.coefficients[1] * phi + fit.coefficients[2] * phi * phi;
    let (f_lo, f_mid, f_hi) = (eval(lo), eval(mid), eval(hi));
    let span = (f_lo.max(f_mid).max(f_hi) - f_lo.min(f_mid).min(f_hi)).abs().max(1e-12);
    let bump = 0.05 * span;
    if f_mid > f_lo + bump && f_mid > f_hi + bump {
        Some(Behavior::Concave)
    } else if f_mid < f_lo - bump && f_mid < f_hi - bump {
        Some(Behavior::Convex)
    } else if f_hi >= f_lo {
        Some(Behavior::MonotoneIncreasing)
    } else {
        Some(Behavior::MonotoneDecreasing)
    }
}

/// Majority vote of the trained models' individual classifications.
pub fn classify_metric(records: &[EvalRecord], metric: MetricId) -> Behavior {
    let mut votes: Vec<Behavior> = Vec::new();
    for kind in ModelKind::all() {
        if kind == ModelKind::RandomGuess {
            continue;
        }
        let mut phis = Vec::new();
        let mut values = Vec::new();
        for r in records {
            let at_ranking_threshold = match r.threshold {
                Threshold::All => r.metric == MetricId::Auc,
                Threshold::Value(t) => t == 0.5,
            };
            if r.model == kind && r.metric == metric && at_ranking_threshold && r.value.is_finite()
            {
                phis.push(r.test_prevalence);
                values.push(r.value);
            }
        }
        if let Some(behavior) = classify_one(&phis, &values) {
            votes.push(behavior);
        }
    }
    if votes.is_empty() {
        return Behavior::Mixed;
    }
    let mut counts: Vec<(Behavior, usize)> = Vec::new();
    for v in &votes {
        match counts.iter_mut().find(|(b, _)| b == v) {
            Some((_, c)) => *c += 1,
            None => counts.push((*v, 1)),
        }
    }
    counts.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    if counts[0].1 * 2 > votes.len() {
        counts[0].0
    } else {
        Behavior::Mixed
    }
}

/// Write `summary.txt`.
pub fn write_summary(
    output: &SweepOutput,
    betas: &[Beta],
    max_correlation_drift: Option<f64>,
    path: &Path,
) -> Result<(), IoError> {
    let mut text = String::new();
    text.push_str("prevsweep run summary\n=====================\n\n");
    let _ = writeln!(text, "iterations evaluated: {}", output.iterations.len());
    if let (Some(first), Some(last)) = (output.iterations.first(), output.iterations.last()) {
        let _ = writeln!(
            text,
            "test prevalence span: {:.4} .. {:.4}",
            first.test_prevalence, last.test_prevalence
        );
    }
    if let Some(drift) = max_correlation_drift {
        let _ = writeln!(text, "max correlation drift vs original: {drift:.4}");
    }
    text.push_str(
        "\nBehavior of each metric as prevalence changes\n\
         (quadratic fit of value on test prevalence per model, majority vote;\n\
         informational only):\n\n",
    );
    let mut ids = MetricId::threshold_metrics(betas);
    ids.push(MetricId::Auc);
    for id in ids {
        // Raw counts trail the rates exactly; keep the report to the rates.
        if matches!(
            id,
            MetricId::TruePositives
                | MetricId::FalseNegatives
                | MetricId::TrueNegatives
                | MetricId::FalsePositives
        ) {
            continue;
        }
        let behavior = classify_metric(&output.records, id);
        let _ = writeln!(text, "  {:<20} {}", id.name(), behavior.label());
    }
    write_atomic(path, text.as_bytes())
}
