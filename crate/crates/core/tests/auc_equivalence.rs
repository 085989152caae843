//! Property tests for the two AUC routes: trapezoidal integration of the
//! ROC curve against the Mann-Whitney pairwise statistic, which are
//! independent computations of the same quantity.

use prevsweep_core::roc::{auc_mann_whitney, auc_trapezoid, roc_curve, ScoredPredictions};
use proptest::prelude::*;

/// Scores drawn from a coarse grid so ties are frequent, with at least one
/// positive and one negative label.
fn scored_instance() -> impl Strategy<Value = ScoredPredictions> {
    (2usize..50)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0u8..=10, n),
                prop::collection::vec(prop::bool::ANY, n),
                0..n,
                0..n,
            )
        })
        .prop_map(|(grid, labels, force_pos, force_neg)| {
            let scores: Vec<f64> = grid.iter().map(|&g| g as f64 / 10.0).collect();
            let mut labels: Vec<u8> = labels.iter().map(|&b| u8::from(b)).collect();
            labels[force_pos] = 1;
            if force_neg != force_pos {
                labels[force_neg] = 0;
            } else {
                let other = (force_pos + 1) % labels.len();
                labels[other] = 0;
            }
            ScoredPredictions::new(scores, labels).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn trapezoid_equals_mann_whitney(sp in scored_instance()) {
        let trapezoid = auc_trapezoid(&roc_curve(&sp).unwrap());
        let pairwise = auc_mann_whitney(&sp).unwrap();
        prop_assert!((trapezoid - pairwise).abs() <= 1e-12,
            "trapezoid {trapezoid} vs pairwise {pairwise}");
    }

    #[test]
    fn auc_invariant_under_increasing_transform(sp in scored_instance()) {
        let base = auc_mann_whitney(&sp).unwrap();
        // 0.8 s + 0.2 s^2 is strictly increasing on [0, 1] with range [0, 1].
        let transformed: Vec<f64> = sp.scores().iter().map(|&s| 0.8 * s + 0.2 * s * s).collect();
        let sp2 = ScoredPredictions::new(transformed, sp.labels().to_vec()).unwrap();
        let moved = auc_mann_whitney(&sp2).unwrap();
        prop_assert!((base - moved).abs() <= 1e-12);
        let trap = auc_trapezoid(&roc_curve(&sp2).unwrap());
        prop_assert!((trap - base).abs() <= 1e-12);
    }

    #[test]
    fn auc_invariant_under_score_flip_with_label_swap(sp in scored_instance()) {
        let base = auc_mann_whitney(&sp).unwrap();
        let flipped: Vec<f64> = sp.scores().iter().map(|&s| 1.0 - s).collect();
        let swapped: Vec<u8> = sp.labels().iter().map(|&l| 1 - l).collect();
        let sp2 = ScoredPredictions::new(flipped, swapped).unwrap();
        let moved = auc_mann_whitney(&sp2).unwrap();
        prop_assert!((base - moved).abs() <= 1e-12);
    }

    #[test]
    fn auc_stays_inside_unit_interval(sp in scored_instance()) {
        let v = auc_mann_whitney(&sp).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
