//! Score-based evaluation: threshold enumeration, ROC curves, and AUC both
//! by trapezoidal integration and by the Mann-Whitney pairwise statistic.
//!
//! A case is predicted positive iff its score is >= the threshold; with the
//! threshold grid taken at all distinct scores (plus a sentinel above the
//! maximum), this tie rule makes the trapezoid AUC coincide exactly with the
//! Mann-Whitney statistic, ties counting half.

use alloc::vec::Vec;

use thiserror::Error;

use crate::metrics::ConfusionMatrix;

/// Errors from score-based evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum RocError {
    /// Score and label sequences have different lengths.
    #[error("length mismatch: {scores} scores vs {labels} labels")]
    LengthMismatch {
        /// Number of scores.
        scores: usize,
        /// Number of labels.
        labels: usize,
    },
    /// Empty input.
    #[error("empty input")]
    Empty,
    /// A score outside [0, 1] (or NaN).
    #[error("score at index {index} is {value}, expected a probability in [0, 1]")]
    ScoreOutOfRange {
        /// Offending index.
        index: usize,
        /// Offending value.
        value: f64,
    },
    /// A label outside {0, 1}.
    #[error("label at index {index} is {value}, expected 0 or 1")]
    LabelNotBinary {
        /// Offending index.
        index: usize,
        /// Offending value.
        value: u8,
    },
    /// AUC and ROC curves need at least one case of each class.
    #[error("single-class input: positives={positives}, negatives={negatives}")]
    SingleClass {
        /// Positive count.
        positives: usize,
        /// Negative count.
        negatives: usize,
    },
}

/// Per-case positive-class scores with true labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPredictions {
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl ScoredPredictions {
    /// Validate and wrap scores (probabilities in [0, 1]) and binary labels.
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self, RocError> {
        if scores.len() != labels.len() {
            return Err(RocError::LengthMismatch { scores: scores.len(), labels: labels.len() });
        }
        if scores.is_empty() {
            return Err(RocError::Empty);
        }
        for (i, &s) in scores.iter().enumerate() {
            if !(0.0..=1.0).contains(&s) {
                return Err(RocError::ScoreOutOfRange { index: i, value: s });
            }
        }
        for (i, &l) in labels.iter().enumerate() {
            if l > 1 {
                return Err(RocError::LabelNotBinary { index: i, value: l });
            }
        }
        Ok(ScoredPredictions { scores, labels })
    }

    /// The scores.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// The labels.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Number of cases.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    /// Always false; construction rejects empty inputs.
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Number of positive cases.
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Number of negative cases.
    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }
}

/// Decision thresholds for a score set: the distinct score values in
/// descending order, preceded by a sentinel strictly above the maximum so
/// that the first threshold classifies nothing as positive.
pub fn thresholds(sp: &ScoredPredictions) -> Vec<f64> {
    let mut distinct = sp.scores().to_vec();
    distinct.sort_unstable_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(distinct[0] + 1.0);
    out.extend(distinct);
    out
}

/// Confusion matrix at threshold `t`: predicted positive iff score >= t.
pub fn apply_threshold(sp: &ScoredPredictions, t: f64) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&s, &l) in sp.scores().iter().zip(sp.labels()) {
        match (l, s >= t) {
            (1, true) => cm.true_positives += 1,
            (1, false) => cm.false_negatives += 1,
            (0, false) => cm.true_negatives += 1,
            (0, true) => cm.false_positives += 1,
            _ => unreachable!(),
        }
    }
    cm
}

/// Confusion matrices at every threshold of [`thresholds`], in the same
/// descending order, computed incrementally in O(n log n) instead of
/// re-tallying per threshold.
pub fn threshold_confusions(sp: &ScoredPredictions) -> Vec<(f64, ConfusionMatrix)> {
    let pos = sp.positives() as u64;
    let neg = sp.negatives() as u64;
    let mut order: Vec<usize> = (0..sp.len()).collect();
    order.sort_unstable_by(|&a, &b| sp.scores()[b].total_cmp(&sp.scores()[a]));
    let mut out = Vec::with_capacity(sp.len() + 1);
    let sentinel = sp.scores()[order[0]] + 1.0;
    let mut tp = 0u64;
    let mut fp = 0u64;
    out.push((sentinel, ConfusionMatrix::new(0, pos, neg, 0)));
    let mut i = 0;
    while i < order.len() {
        let score = sp.scores()[order[i]];
        while i < order.len() && sp.scores()[order[i]] == score {
            if sp.labels()[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((score, ConfusionMatrix::new(tp, pos - tp, neg - fp, fp)));
    }
    out
}

/// A point on the ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// False positive rate.
    pub fpr: f64,
    /// True positive rate.
    pub tpr: f64,
}

/// ROC curve: (FPR, TPR) at every threshold, monotone from (0, 0) to (1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Curve points ordered by non-decreasing FPR then TPR.
    pub points: Vec<RocPoint>,
}

/// Build the ROC curve over all thresholds of the score set.
pub fn roc_curve(sp: &ScoredPredictions) -> Result<RocCurve, RocError> {
    let pos = sp.positives();
    let neg = sp.negatives();
    if pos == 0 || neg == 0 {
        return Err(RocError::SingleClass { positives: pos, negatives: neg });
    }
    // Walk scores in descending order; each distinct score lowers the
    // threshold to it and moves the cumulative (fp, tp) tallies.
    let mut order: Vec<usize> = (0..sp.len()).collect();
    order.sort_unstable_by(|&a, &b| sp.scores()[b].total_cmp(&sp.scores()[a]));
    let mut points = Vec::with_capacity(sp.len() + 1);
    points.push(RocPoint { fpr: 0.0, tpr: 0.0 }); // sentinel threshold
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < order.len() {
        let score = sp.scores()[order[i]];
        while i < order.len() && sp.scores()[order[i]] == score {
            if sp.labels()[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64 });
    }
    Ok(RocCurve { points })
}

/// Area under a ROC curve by the trapezoid rule.
pub fn auc_trapezoid(curve: &RocCurve) -> f64 {
    let mut area = 0.0;
    for w in curve.points.windows(2) {
        area += (w[1].fpr - w[0].fpr) * 0.5 * (w[0].tpr + w[1].tpr);
    }
    area
}

/// AUC as the Mann-Whitney statistic: over all (positive, negative) pairs,
/// the fraction where the positive outscores the negative, ties counting
/// half. Computed in O(n log n) by sorting.
pub fn auc_mann_whitney(sp: &ScoredPredictions) -> Result<f64, RocError> {
    let pos = sp.positives();
    let neg = sp.negatives();
    if pos == 0 || neg == 0 {
        return Err(RocError::SingleClass { positives: pos, negatives: neg });
    }
    let mut order: Vec<usize> = (0..sp.len()).collect();
    order.sort_unstable_by(|&a, &b| sp.scores()[a].total_cmp(&sp.scores()[b]));
    let mut credit = 0.0;
    let mut negatives_below = 0u64;
    let mut i = 0;
    while i < order.len() {
        let score = sp.scores()[order[i]];
        let mut pos_here = 0u64;
        let mut neg_here = 0u64;
        while i < order.len() && sp.scores()[order[i]] == score {
            if sp.labels()[order[i]] == 1 {
                pos_here += 1;
            } else {
                neg_here += 1;
            }
            i += 1;
        }
        credit += pos_here as f64 * negatives_below as f64;
        credit += 0.5 * pos_here as f64 * neg_here as f64;
        negatives_below += neg_here;
    }
    Ok(credit / (pos as f64 * neg as f64))
}
