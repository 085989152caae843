//! Threshold-based confusion-matrix metrics in two equivalent
//! parameterizations: the count form over (TP, FN, TN, FP) and the rate form
//! over (n, prevalence, TPR, TNR).
//!
//! The two forms are implemented independently on purpose — the count form
//! works directly on the four tallies, the rate form on the four derived
//! quantities — and their agreement to 1e-12 is enforced by tests. Degenerate
//! denominators never fail; they resolve to documented conventions:
//!
//! - TPR/TNR/PPV/NPV with a zero denominator evaluate to 0 (flagged);
//! - MCC and Cohen's kappa with a zero denominator evaluate to 0;
//! - the diagnostic odds ratio with a zero denominator is `+inf` when the
//!   numerator is positive and NaN (undefined, excluded from ranking) when
//!   numerator and denominator are both zero;
//! - F1/F-beta/Jaccard with an all-zero denominator evaluate to 0.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

/// Errors from metric construction.
#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    /// Label and prediction sequences have different lengths.
    #[error("length mismatch: {labels} labels vs {predicted} predictions")]
    LengthMismatch {
        /// Number of labels.
        labels: usize,
        /// Number of predictions.
        predicted: usize,
    },
    /// Empty input where at least one case is required.
    #[error("empty input")]
    Empty,
    /// A value outside {0, 1} where a binary label was expected.
    #[error("label at index {index} is {value}, expected 0 or 1")]
    NotBinary {
        /// Offending index.
        index: usize,
        /// Offending value.
        value: u8,
    },
    /// Rates require both classes to be present.
    #[error("single-class input: positives={positives}, negatives={negatives}")]
    SingleClass {
        /// Actual-positive count.
        positives: u64,
        /// Actual-negative count.
        negatives: u64,
    },
    /// Invalid F-beta weight.
    #[error("beta must be finite and positive, got {0}")]
    InvalidBeta(f64),
}

/// The four tallies of a binary classification outcome at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    /// Positive cases correctly predicted positive.
    pub true_positives: u64,
    /// Positive cases incorrectly predicted negative.
    pub false_negatives: u64,
    /// Negative cases correctly predicted negative.
    pub true_negatives: u64,
    /// Negative cases incorrectly predicted positive.
    pub false_positives: u64,
}

impl ConfusionMatrix {
    /// Construct from the four tallies in (tp, fn, tn, fp) order.
    pub fn new(tp: u64, fn_: u64, tn: u64, fp: u64) -> Self {
        ConfusionMatrix {
            true_positives: tp,
            false_negatives: fn_,
            true_negatives: tn,
            false_positives: fp,
        }
    }

    /// Tally predictions against labels. Both sequences are 0/1 valued.
    pub fn from_predictions(labels: &[u8], predicted: &[u8]) -> Result<Self, MetricsError> {
        if labels.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                labels: labels.len(),
                predicted: predicted.len(),
            });
        }
        if labels.is_empty() {
            return Err(MetricsError::Empty);
        }
        let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
        for (i, (&y, &p)) in labels.iter().zip(predicted).enumerate() {
            if y > 1 {
                return Err(MetricsError::NotBinary { index: i, value: y });
            }
            if p > 1 {
                return Err(MetricsError::NotBinary { index: i, value: p });
            }
            match (y, p) {
                (1, 1) => cm.true_positives += 1,
                (1, 0) => cm.false_negatives += 1,
                (0, 0) => cm.true_negatives += 1,
                (0, 1) => cm.false_positives += 1,
                _ => unreachable!(),
            }
        }
        Ok(cm)
    }

    /// Total number of cases.
    pub fn n(&self) -> u64 {
        self.true_positives + self.false_negatives + self.true_negatives + self.false_positives
    }

    /// Actual positives.
    pub fn positives(&self) -> u64 {
        self.true_positives + self.false_negatives
    }

    /// Actual negatives.
    pub fn negatives(&self) -> u64 {
        self.true_negatives + self.false_positives
    }

    /// True positive rate; 0 when there are no actual positives.
    pub fn tpr(&self) -> f64 {
        ratio(self.true_positives, self.positives())
    }

    /// True negative rate; 0 when there are no actual negatives.
    pub fn tnr(&self) -> f64 {
        ratio(self.true_negatives, self.negatives())
    }

    /// Positive predictive value; 0 when nothing is predicted positive.
    pub fn ppv(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_positives)
    }

    /// Negative predictive value; 0 when nothing is predicted negative.
    pub fn npv(&self) -> f64 {
        ratio(self.true_negatives, self.true_negatives + self.false_negatives)
    }

    /// False positive rate; 0 when there are no actual negatives.
    pub fn fpr(&self) -> f64 {
        ratio(self.false_positives, self.negatives())
    }

    /// False negative rate; 0 when there are no actual positives.
    pub fn fnr(&self) -> f64 {
        ratio(self.false_negatives, self.positives())
    }

    /// Swap the roles of the positive and negative classes.
    pub fn class_swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            true_positives: self.true_negatives,
            false_negatives: self.false_positives,
            true_negatives: self.true_positives,
            false_positives: self.false_negatives,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// The rate parameterization of a classification outcome: sample size,
/// prevalence, TPR, and TNR. Every confusion-matrix metric can be derived
/// from these four quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuad {
    /// Sample size.
    pub n: u64,
    /// Prevalence of the positive class, (TP + FN) / n.
    pub phi: f64,
    /// True positive rate.
    pub tpr: f64,
    /// True negative rate.
    pub tnr: f64,
}

/// Convert counts to rates. Requires both classes present so that TPR and
/// TNR are well defined.
pub fn to_rates(cm: &ConfusionMatrix) -> Result<RateQuad, MetricsError> {
    if cm.positives() == 0 || cm.negatives() == 0 {
        return Err(MetricsError::SingleClass {
            positives: cm.positives(),
            negatives: cm.negatives(),
        });
    }
    Ok(RateQuad {
        n: cm.n(),
        phi: cm.positives() as f64 / cm.n() as f64,
        tpr: cm.tpr(),
        tnr: cm.tnr(),
    })
}

/// F-beta weight: finite and strictly positive, with total ordering so it
/// can key maps and appear in metric identifiers.
#[derive(Debug, Clone, Copy)]
pub struct Beta(f64);

impl Beta {
    /// Validate and wrap a beta value.
    pub fn new(beta: f64) -> Result<Self, MetricsError> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(MetricsError::InvalidBeta(beta));
        }
        Ok(Beta(beta))
    }

    /// The wrapped value.
    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Beta {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == core::cmp::Ordering::Equal
    }
}
impl Eq for Beta {}
impl PartialOrd for Beta {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Beta {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
impl core::hash::Hash for Beta {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

/// Whether larger or smaller values of a metric indicate a better model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Larger is better (all metrics except raw error counts).
    HigherIsBetter,
    /// Smaller is better (false negatives and false positives).
    LowerIsBetter,
}

/// Identifier of one evaluation metric.
///
/// The raw confusion-matrix entries count as metrics here because the study
/// ranks models by them alongside the derived scores. The derived rates
/// (FPR, FNR, FDR, FOR) are complements of TNR, TPR, PPV, NPV and are used
/// inside evaluations rather than exposed as separate identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricId {
    /// True positive count.
    TruePositives,
    /// False negative count.
    FalseNegatives,
    /// True negative count.
    TrueNegatives,
    /// False positive count.
    FalsePositives,
    /// True positive rate (sensitivity, recall).
    Tpr,
    /// True negative rate (specificity).
    Tnr,
    /// Positive predictive value (precision).
    Ppv,
    /// Negative predictive value.
    Npv,
    /// Fraction of correct predictions.
    Accuracy,
    /// Balanced accuracy, (TPR + TNR) / 2.
    BalancedAccuracy,
    /// Bookmaker informedness, TPR + TNR - 1.
    BookmakerInformedness,
    /// Harmonic mean of precision and recall.
    F1,
    /// Matthews correlation coefficient.
    Mcc,
    /// Geometric mean of TPR and TNR.
    Gmean,
    /// Fowlkes-Mallows index, sqrt(PPV * TPR).
    FowlkesMallows,
    /// Markedness, PPV + NPV - 1.
    Markedness,
    /// Diagnostic odds ratio, (TPR * TNR) / (FPR * FNR).
    DiagOddsRatio,
    /// Jaccard index, TP / (TP + FN + FP).
    JaccardIndex,
    /// Cohen's kappa.
    CohensKappa,
    /// F-beta score with the given weight.
    FBeta(Beta),
    /// Area under the ROC curve (score-based; not computable from one
    /// confusion matrix).
    Auc,
}

impl MetricId {
    /// Ranking orientation of this metric.
    pub fn orientation(&self) -> Orientation {
        match self {
            MetricId::FalseNegatives | MetricId::FalsePositives => Orientation::LowerIsBetter,
            _ => Orientation::HigherIsBetter,
        }
    }

    /// Stable display name, used in report tables.
    pub fn name(&self) -> String {
        match self {
            MetricId::TruePositives => "True_positives".into(),
            MetricId::FalseNegatives => "False_negatives".into(),
            MetricId::TrueNegatives => "True_negatives".into(),
            MetricId::FalsePositives => "False_positives".into(),
            MetricId::Tpr => "TPR".into(),
            MetricId::Tnr => "TNR".into(),
            MetricId::Ppv => "PPV".into(),
            MetricId::Npv => "NPV".into(),
            MetricId::Accuracy => "Accuracy".into(),
            MetricId::BalancedAccuracy => "BA".into(),
            MetricId::BookmakerInformedness => "BI".into(),
            MetricId::F1 => "F1_score".into(),
            MetricId::Mcc => "MCC".into(),
            MetricId::Gmean => "Gmean".into(),
            MetricId::FowlkesMallows => "Fowlkes_Mallows".into(),
            MetricId::Markedness => "Markedness".into(),
            MetricId::DiagOddsRatio => "Diag_odds_ratio".into(),
            MetricId::JaccardIndex => "Jaccardindex".into(),
            MetricId::CohensKappa => "Cohens_kappa".into(),
            MetricId::FBeta(beta) => format!("F_beta_score_{}", beta.value()),
            MetricId::Auc => "AUC".into(),
        }
    }

    /// All confusion-matrix metric identifiers (everything except AUC),
    /// with one F-beta entry per element of `betas`.
    pub fn threshold_metrics(betas: &[Beta]) -> Vec<MetricId> {
        let mut ids = alloc::vec![
            MetricId::TruePositives,
            MetricId::FalseNegatives,
            MetricId::TrueNegatives,
            MetricId::FalsePositives,
            MetricId::Tpr,
            MetricId::Tnr,
            MetricId::Ppv,
            MetricId::Npv,
            MetricId::Accuracy,
            MetricId::BalancedAccuracy,
            MetricId::BookmakerInformedness,
            MetricId::F1,
            MetricId::Mcc,
            MetricId::Gmean,
            MetricId::FowlkesMallows,
            MetricId::Markedness,
            MetricId::DiagOddsRatio,
            MetricId::JaccardIndex,
            MetricId::CohensKappa,
        ];
        ids.extend(betas.iter().map(|&b| MetricId::FBeta(b)));
        ids
    }
}

/// Evaluate a metric on a confusion matrix (count form).
///
/// Degenerate denominators resolve to the module-level conventions and never
/// fail; the only non-finite outputs are the diagnostic odds ratio's `+inf`
/// (zero denominator, positive numerator) and NaN (0/0, undefined).
///
/// # Panics
///
/// Panics if `id` is [`MetricId::Auc`], which is score-based and cannot be
/// computed from a single confusion matrix.
pub fn metric(cm: &ConfusionMatrix, id: MetricId) -> f64 {
    let tp = cm.true_positives as f64;
    let fn_ = cm.false_negatives as f64;
    let tn = cm.true_negatives as f64;
    let fp = cm.false_positives as f64;
    let n = cm.n() as f64;
    match id {
        MetricId::TruePositives => tp,
        MetricId::FalseNegatives => fn_,
        MetricId::TrueNegatives => tn,
        MetricId::FalsePositives => fp,
        MetricId::Tpr => cm.tpr(),
        MetricId::Tnr => cm.tnr(),
        MetricId::Ppv => cm.ppv(),
        MetricId::Npv => cm.npv(),
        MetricId::Accuracy => (tp + tn) / n,
        MetricId::BalancedAccuracy => 0.5 * (cm.tpr() + cm.tnr()),
        MetricId::BookmakerInformedness => cm.tpr() + cm.tnr() - 1.0,
        MetricId::F1 => {
            let den = 2.0 * tp + fp + fn_;
            if den == 0.0 {
                0.0
            } else {
                2.0 * tp / den
            }
        }
        MetricId::Mcc => {
            let den2 = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
            if den2 == 0.0 {
                0.0
            } else {
                (tp * tn - fp * fn_) / den2.sqrt()
            }
        }
        MetricId::Gmean => (cm.tpr() * cm.tnr()).sqrt(),
        MetricId::FowlkesMallows => (cm.ppv() * cm.tpr()).sqrt(),
        MetricId::Markedness => cm.ppv() + cm.npv() - 1.0,
        MetricId::DiagOddsRatio => diag_odds_ratio(cm, false),
        MetricId::JaccardIndex => {
            let den = tp + fn_ + fp;
            if den == 0.0 {
                0.0
            } else {
                tp / den
            }
        }
        MetricId::CohensKappa => {
            let accuracy = (tp + tn) / n;
            let expected = ((tp + fn_) * (tp + fp) + (tn + fp) * (tn + fn_)) / (n * n);
            if expected == 1.0 {
                0.0
            } else {
                (accuracy - expected) / (1.0 - expected)
            }
        }
        MetricId::FBeta(beta) => {
            let b2 = beta.value() * beta.value();
            let ppv = cm.ppv();
            let tpr = cm.tpr();
            let den = b2 * ppv + tpr;
            if den == 0.0 {
                0.0
            } else {
                (1.0 + b2) * ppv * tpr / den
            }
        }
        MetricId::Auc => panic!("AUC is score-based; use the roc module"),
    }
}

/// Diagnostic odds ratio with an optional Haldane-Anscombe continuity
/// correction (add 0.5 to all four cells). The correction defaults to off
/// everywhere in this crate.
pub fn diag_odds_ratio(cm: &ConfusionMatrix, continuity_correction: bool) -> f64 {
    let (tp, fn_, tn, fp) = if continuity_correction {
        (
            cm.true_positives as f64 + 0.5,
            cm.false_negatives as f64 + 0.5,
            cm.true_negatives as f64 + 0.5,
            cm.false_positives as f64 + 0.5,
        )
    } else {
        (
            cm.true_positives as f64,
            cm.false_negatives as f64,
            cm.true_negatives as f64,
            cm.false_positives as f64,
        )
    };
    let tpr = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
    let tnr = if tn + fp == 0.0 { 0.0 } else { tn / (tn + fp) };
    let fpr = if tn + fp == 0.0 { 0.0 } else { fp / (tn + fp) };
    let fnr = if tp + fn_ == 0.0 { 0.0 } else { fn_ / (tp + fn_) };
    let num = tpr * tnr;
    let den = fpr * fnr;
    if den == 0.0 {
        if num == 0.0 {
            f64::NAN // undefined; excluded from ranking
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// True when evaluating `id` on `cm` trips one of the degenerate-denominator
/// conventions (zero-denominator rate forced to 0, 0/0 forced to 0 or NaN).
pub fn is_degenerate(cm: &ConfusionMatrix, id: MetricId) -> bool {
    let tp = cm.true_positives;
    let fn_ = cm.false_negatives;
    let tn = cm.true_negatives;
    let fp = cm.false_positives;
    let no_pos = tp + fn_ == 0;
    let no_neg = tn + fp == 0;
    let no_pred_pos = tp + fp == 0;
    let no_pred_neg = tn + fn_ == 0;
    match id {
        MetricId::Tpr => no_pos,
        MetricId::Tnr => no_neg,
        MetricId::Ppv => no_pred_pos,
        MetricId::Npv => no_pred_neg,
        MetricId::BalancedAccuracy | MetricId::BookmakerInformedness | MetricId::Gmean => {
            no_pos || no_neg
        }
        MetricId::FowlkesMallows => no_pos || no_pred_pos,
        MetricId::Markedness => no_pred_pos || no_pred_neg,
        MetricId::F1 | MetricId::JaccardIndex | MetricId::FBeta(_) => 2 * tp + fp + fn_ == 0 || no_pos || no_pred_pos,
        MetricId::Mcc => no_pos || no_neg || no_pred_pos || no_pred_neg,
        MetricId::CohensKappa => {
            ((tp + fn_) * (tp + fp) + (tn + fp) * (tn + fn_)) == cm.n() * cm.n()
        }
        MetricId::DiagOddsRatio => {
            let v = diag_odds_ratio(cm, false);
            !v.is_finite()
        }
        _ => false,
    }
}

/// Evaluate a rate-expressible metric from the (n, phi, TPR, TNR)
/// parameterization.
///
/// This path implements the rate-form equations directly (with the corrected
/// Fowlkes-Mallows square root and the corrected kappa expected accuracy,
/// which has no division by n) and is kept independent of the count form.
///
/// # Panics
///
/// Panics for the raw count identifiers and AUC, which are not rate-form
/// metrics.
pub fn metric_from_rates(rq: &RateQuad, id: MetricId) -> f64 {
    let phi = rq.phi;
    let tpr = rq.tpr;
    let tnr = rq.tnr;
    // Rates of predicted-positive and predicted-negative cases.
    let pred_pos = tpr * phi + (1.0 - tnr) * (1.0 - phi);
    let pred_neg = tnr * (1.0 - phi) + (1.0 - tpr) * phi;
    match id {
        MetricId::Tpr => tpr,
        MetricId::Tnr => tnr,
        MetricId::Accuracy => tpr * phi + tnr * (1.0 - phi),
        MetricId::Ppv => {
            if pred_pos == 0.0 {
                0.0
            } else {
                tpr * phi / pred_pos
            }
        }
        MetricId::Npv => {
            if pred_neg == 0.0 {
                0.0
            } else {
                tnr * (1.0 - phi) / pred_neg
            }
        }
        MetricId::BalancedAccuracy => 0.5 * (tpr + tnr),
        MetricId::BookmakerInformedness => tpr + tnr - 1.0,
        MetricId::F1 => {
            let den = tpr * phi + phi + (1.0 - tnr) * (1.0 - phi);
            if den == 0.0 {
                0.0
            } else {
                2.0 * tpr * phi / den
            }
        }
        MetricId::Mcc => {
            let den2 = pred_pos * pred_neg;
            if den2 == 0.0 {
                0.0
            } else {
                (phi * (1.0 - phi)).sqrt() * (tpr + tnr - 1.0) / den2.sqrt()
            }
        }
        MetricId::Gmean => (tpr * tnr).sqrt(),
        MetricId::FowlkesMallows => {
            // sqrt(PPV * TPR) = sqrt(TPR^2 phi / (TPR phi + (1 - TNR)(1 - phi))).
            if pred_pos == 0.0 {
                0.0
            } else {
                (tpr * tpr * phi / pred_pos).sqrt()
            }
        }
        MetricId::Markedness => {
            let ppv = if pred_pos == 0.0 { 0.0 } else { tpr * phi / pred_pos };
            let npv = if pred_neg == 0.0 { 0.0 } else { tnr * (1.0 - phi) / pred_neg };
            ppv + npv - 1.0
        }
        MetricId::DiagOddsRatio => {
            let num = tpr * tnr;
            let den = (1.0 - tnr) * (1.0 - tpr);
            if den == 0.0 {
                if num == 0.0 {
                    f64::NAN
                } else {
                    f64::INFINITY
                }
            } else {
                num / den
            }
        }
        MetricId::JaccardIndex => {
            let den = phi + (1.0 - tnr) * (1.0 - phi);
            if den == 0.0 {
                0.0
            } else {
                tpr * phi / den
            }
        }
        MetricId::CohensKappa => {
            let accuracy = tpr * phi + tnr * (1.0 - phi);
            let expected = phi * pred_pos + (1.0 - phi) * pred_neg;
            if expected == 1.0 {
                0.0
            } else {
                (accuracy - expected) / (1.0 - expected)
            }
        }
        MetricId::FBeta(beta) => {
            let b2 = beta.value() * beta.value();
            let ppv = if pred_pos == 0.0 { 0.0 } else { tpr * phi / pred_pos };
            let den = b2 * ppv + tpr;
            if den == 0.0 {
                0.0
            } else {
                (1.0 + b2) * ppv * tpr / den
            }
        }
        MetricId::TruePositives
        | MetricId::FalseNegatives
        | MetricId::TrueNegatives
        | MetricId::FalsePositives
        | MetricId::Auc => panic!("{:?} has no rate form", id),
    }
}

/// The metric identifiers that have a rate form.
pub fn rate_form_metrics(betas: &[Beta]) -> Vec<MetricId> {
    let mut ids = alloc::vec![
        MetricId::Tpr,
        MetricId::Tnr,
        MetricId::Ppv,
        MetricId::Npv,
        MetricId::Accuracy,
        MetricId::BalancedAccuracy,
        MetricId::BookmakerInformedness,
        MetricId::F1,
        MetricId::Mcc,
        MetricId::Gmean,
        MetricId::FowlkesMallows,
        MetricId::Markedness,
        MetricId::DiagOddsRatio,
        MetricId::JaccardIndex,
        MetricId::CohensKappa,
    ];
    ids.extend(betas.iter().map(|&b| MetricId::FBeta(b)));
    ids
}

/// Evaluate every confusion-matrix metric (all of [`MetricId::threshold_metrics`])
/// with one F-beta entry per element of `betas`.
pub fn all_metrics(cm: &ConfusionMatrix, betas: &[Beta]) -> BTreeMap<MetricId, f64> {
    MetricId::threshold_metrics(betas)
        .into_iter()
        .map(|id| (id, metric(cm, id)))
        .collect()
}

/// The default F-beta weights used throughout: beta = 0.5 and beta = 2.
pub fn default_betas() -> Vec<Beta> {
    alloc::vec![Beta::new(0.5).unwrap(), Beta::new(2.0).unwrap()]
}
