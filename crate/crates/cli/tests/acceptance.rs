//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them).
//!
//! Criteria 6-8 share a single full-grid sweep of the default synthetic
//! dataset (n = 3000, prevalence 0.45, separation 0.4, seed 42), which takes
//! a couple of minutes at desk scale; everything else is fast.

use std::sync::OnceLock;

use rayon::prelude::*;

use prevsweep::commands::{
    files_identical, prevalence_sensitive_metrics, prevalence_stable_metrics, resolve_dataset,
    run_sweep_command,
};
use prevsweep::config::RunConfig;
use prevsweep_core::analysis::{
    design_with_intercept, ols, rank_models, rank_spread_tests, rank_table, rank_variance,
    threshold_expansion_series,
};
use prevsweep_core::dataset::correlation_matrix;
use prevsweep_core::dist::{chi_square_cdf, f_cdf, ln_gamma, t_cdf};
use prevsweep_core::metrics::{
    all_metrics, default_betas, metric, metric_from_rates, rate_form_metrics, to_rates,
    ConfusionMatrix, MetricId, Orientation,
};
use prevsweep_core::models::{loss_and_gradient, ModelKind};
use prevsweep_core::roc::{auc_mann_whitney, auc_trapezoid, roc_curve, ScoredPredictions};
use prevsweep_core::seed::Seed;
use prevsweep_core::sweep::{
    assemble, dataset_chain, evaluate_iteration, DatasetChain, SweepOutput, ThresholdMode,
};
use rand::Rng;

/// Confusion-matrix cells in (tp, fn, tn, fp) order.
type Cells = (u64, u64, u64, u64);

/// The six reference confusion matrices.
const COLUMNS: [(&str, Cells); 6] = [
    ("GBM", (339, 223, 517, 164)),
    ("GLM", (292, 270, 537, 144)),
    ("KNN", (296, 266, 521, 160)),
    ("LDA", (286, 276, 543, 138)),
    ("RF", (311, 251, 543, 138)),
    ("randomguess", (267, 295, 386, 295)),
];

/// Published metric values per column, same order as `COLUMNS`.
/// Rows: TPR, TNR, PPV, NPV, Accuracy, BA, BI, F1, MCC, Gmean, FM, MK, DOR,
/// JI, Kappa. (The two F-beta rows are excluded: they are inconsistent with
/// the stated F-beta formula. AUC is score-based and not derivable from the
/// counts.)
const GOLDEN_ROWS: [(MetricId, [f64; 6]); 15] = [
    (MetricId::Tpr, [0.603, 0.520, 0.527, 0.509, 0.553, 0.475]),
    (MetricId::Tnr, [0.759, 0.789, 0.765, 0.797, 0.797, 0.567]),
    (MetricId::Ppv, [0.674, 0.670, 0.649, 0.675, 0.693, 0.475]),
    (MetricId::Npv, [0.699, 0.665, 0.662, 0.663, 0.684, 0.567]),
    (MetricId::Accuracy, [0.689, 0.667, 0.657, 0.667, 0.687, 0.525]),
    (MetricId::BalancedAccuracy, [0.681, 0.654, 0.646, 0.653, 0.675, 0.521]),
    (MetricId::BookmakerInformedness, [0.362, 0.308, 0.292, 0.306, 0.351, 0.042]),
    (MetricId::F1, [0.637, 0.585, 0.582, 0.580, 0.615, 0.475]),
    (MetricId::Mcc, [0.367, 0.321, 0.301, 0.322, 0.363, 0.042]),
    (MetricId::Gmean, [0.677, 0.640, 0.635, 0.637, 0.664, 0.519]),
    (MetricId::FowlkesMallows, [0.638, 0.590, 0.585, 0.586, 0.619, 0.475]),
    (MetricId::Markedness, [0.373, 0.335, 0.311, 0.338, 0.377, 0.042]),
    (MetricId::DiagOddsRatio, [4.792, 4.033, 3.623, 4.077, 4.875, 1.184]),
    (MetricId::JaccardIndex, [0.467, 0.414, 0.410, 0.409, 0.444, 0.312]),
    (MetricId::CohensKappa, [0.366, 0.314, 0.297, 0.313, 0.357, 0.042]),
];

struct SharedSweep {
    chain: DatasetChain,
    output: SweepOutput,
}

/// The default synthetic sweep in full-grid mode, evaluated once and shared
/// by criteria 6-8.
fn shared_sweep() -> &'static SharedSweep {
    static SWEEP: OnceLock<SharedSweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let config = RunConfig::default();
        let mut sweep_config = config.to_sweep_config();
        sweep_config.threshold_mode = ThresholdMode::FullGrid;
        let ds = resolve_dataset(&config).expect("default synthetic dataset");
        let chain = dataset_chain(&ds, &sweep_config).expect("chain");
        let evals = chain
            .entries
            .par_iter()
            .map(|entry| evaluate_iteration(entry, &sweep_config))
            .collect::<Result<Vec<_>, _>>()
            .expect("evaluation");
        let output = assemble(&chain, evals, &sweep_config).expect("assembly");
        SharedSweep { chain, output }
    })
}

#[test]
fn criterion_01_golden_metric_values() {
    let betas = default_betas();
    for (col, ((name, (tp, fn_, tn, fp)), _)) in COLUMNS.iter().zip(GOLDEN_ROWS[0].1).enumerate()
    {
        let cm = ConfusionMatrix::new(*tp, *fn_, *tn, *fp);
        let values = all_metrics(&cm, &betas);
        assert_eq!(values[&MetricId::TruePositives], *tp as f64);
        assert_eq!(values[&MetricId::FalseNegatives], *fn_ as f64);
        assert_eq!(values[&MetricId::TrueNegatives], *tn as f64);
        assert_eq!(values[&MetricId::FalsePositives], *fp as f64);
        for (id, row) in GOLDEN_ROWS {
            let got = values[&id];
            let want = row[col];
            assert!(
                (got - want).abs() <= 1e-3,
                "{name} {}: got {got}, published {want}",
                id.name()
            );
        }
    }
    println!("criterion 01 (golden metric values, 6 columns x 19 rows, +-0.001): PASS");
}

#[test]
fn criterion_02_golden_mcc_triple() {
    let cases =
        [((4, 0, 5, 1), 0.8165), ((2, 2, 6, 0), 0.6124), ((2, 2, 5, 1), 0.3563)];
    for ((tp, fn_, tn, fp), want) in cases {
        let got = metric(&ConfusionMatrix::new(tp, fn_, tn, fp), MetricId::Mcc);
        assert!((got - want).abs() <= 5e-3, "MCC: got {got}, want {want}");
    }
    println!("criterion 02 (worked MCC examples 0.8165 / 0.6124 / 0.3563, +-0.005): PASS");
}

#[test]
fn criterion_03_rank_reproduction() {
    // Expected rank rows, models ordered (GBM, GLM, KNN, LDA, RF, randomguess).
    let count_rows: [(MetricId, [f64; 6], [f64; 6]); 4] = [
        (
            MetricId::TruePositives,
            [339.0, 292.0, 296.0, 286.0, 311.0, 267.0],
            [1.0, 4.0, 3.0, 5.0, 2.0, 6.0],
        ),
        (
            MetricId::FalseNegatives,
            [223.0, 270.0, 266.0, 276.0, 251.0, 295.0],
            [1.0, 4.0, 3.0, 5.0, 2.0, 6.0],
        ),
        (
            MetricId::TrueNegatives,
            [517.0, 537.0, 521.0, 543.0, 543.0, 386.0],
            [5.0, 3.0, 4.0, 1.5, 1.5, 6.0],
        ),
        (
            MetricId::FalsePositives,
            [164.0, 144.0, 160.0, 138.0, 138.0, 295.0],
            [5.0, 3.0, 4.0, 1.5, 1.5, 6.0],
        ),
    ];
    let value_rows: [(MetricId, [f64; 6]); 16] = [
        (MetricId::Tpr, [1.0, 4.0, 3.0, 5.0, 2.0, 6.0]),
        (MetricId::Tnr, [5.0, 3.0, 4.0, 1.5, 1.5, 6.0]),
        (MetricId::Ppv, [3.0, 4.0, 5.0, 2.0, 1.0, 6.0]),
        (MetricId::Npv, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
        (MetricId::Accuracy, [1.0, 3.5, 5.0, 3.5, 2.0, 6.0]),
        (MetricId::BalancedAccuracy, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
        (MetricId::BookmakerInformedness, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
        (MetricId::F1, [1.0, 3.0, 4.0, 5.0, 2.0, 6.0]),
        (MetricId::Mcc, [1.0, 4.0, 5.0, 3.0, 2.0, 6.0]),
        (MetricId::Gmean, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
        (MetricId::FowlkesMallows, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
        (MetricId::Markedness, [2.0, 4.0, 5.0, 3.0, 1.0, 6.0]),
        (MetricId::DiagOddsRatio, [2.0, 4.0, 5.0, 3.0, 1.0, 6.0]),
        (MetricId::JaccardIndex, [1.0, 3.0, 4.0, 5.0, 2.0, 6.0]),
        (MetricId::CohensKappa, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
        (MetricId::Auc, [1.0, 3.0, 5.0, 4.0, 2.0, 6.0]),
    ];
    let models = ["GBM", "GLM", "KNN", "LDA", "RF", "randomguess"];
    let auc_values = [0.734, 0.718, 0.694, 0.717, 0.727, 0.524];

    let check = |id: MetricId, values: &[f64; 6], expected: &[f64; 6]| {
        let pairs: Vec<(&str, f64)> = models.iter().copied().zip(values.iter().copied()).collect();
        let out = rank_models(&pairs, id.orientation()).unwrap();
        for (m, want) in models.iter().zip(expected) {
            let got = out.ranks.iter().find(|(k, _)| k == m).unwrap().1;
            assert_eq!(got, *want, "{} rank of {m}", id.name());
        }
    };
    for (id, values, expected) in &count_rows {
        check(*id, values, expected);
    }
    for (id, expected) in &value_rows {
        let values: [f64; 6] = if *id == MetricId::Auc {
            auc_values
        } else {
            GOLDEN_ROWS.iter().find(|(gid, _)| gid == id).unwrap().1
        };
        check(*id, &values, expected);
    }
    assert_eq!(MetricId::FalseNegatives.orientation(), Orientation::LowerIsBetter);
    println!("criterion 03 (20 published rank rows incl. tie cases 3.5/3.5 and 1.5/1.5): PASS");
}

#[test]
fn criterion_04_auc_oracle_equivalence() {
    let mut rng = Seed(0xacc4).rng();
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = rng.random_range(2..=50);
        // Coarse score grid so ties are common.
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..=12) as f64 / 12.0).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<bool>())).collect();
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        labels[a] = 1;
        if a != b {
            labels[b] = 0;
        } else {
            labels[(a + 1) % n] = 0;
        }
        let sp = ScoredPredictions::new(scores, labels).unwrap();
        let trapezoid = auc_trapezoid(&roc_curve(&sp).unwrap());
        let pairwise = auc_mann_whitney(&sp).unwrap();
        let diff = (trapezoid - pairwise).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "case {case}: {trapezoid} vs {pairwise}");
    }
    println!("criterion 04 (AUC trapezoid = Mann-Whitney on 1000 tied instances, max |diff| {worst:.2e} <= 1e-12): PASS");
}

#[test]
fn criterion_05_count_rate_equivalence() {
    let betas = default_betas();
    let ids = rate_form_metrics(&betas);
    let mut rng = Seed(0xacc5).rng();
    let mut checked = 0usize;
    for _ in 0..10_000 {
        let cm = ConfusionMatrix::new(
            rng.random_range(0..200),
            rng.random_range(1..200),
            rng.random_range(0..200),
            rng.random_range(1..200),
        );
        let rq = to_rates(&cm).unwrap();
        for &id in &ids {
            let a = metric(&cm, id);
            let b = metric_from_rates(&rq, id);
            if a.is_nan() || b.is_nan() {
                assert!(a.is_nan() && b.is_nan(), "{id:?} on {cm:?}: {a} vs {b}");
            } else {
                // 1e-12 absolute for all bounded metrics; relative only once
                // the (unbounded) odds ratio exceeds 1.
                let tol = 1e-12 * f64::max(1.0, f64::max(a.abs(), b.abs()));
                assert!((a - b).abs() <= tol, "{id:?} on {cm:?}: {a} vs {b}");
            }
            checked += 1;
        }
    }
    println!("criterion 05 (count form = corrected rate form on 10000 matrices, {checked} comparisons at 1e-12): PASS");
}

#[test]
fn criterion_06_protocol_invariants() {
    let shared = shared_sweep();
    // Constant n, exact.
    for entry in &shared.chain.entries {
        assert_eq!(entry.dataset.n(), 3000, "n changed at iteration {}", entry.iteration);
    }
    // Strictly monotone prevalence within each phase (the chain orders
    // iterations from most-reduced to most-increased, so the whole sequence
    // is strictly increasing), with exact step arithmetic.
    let base_pos = 1350i64; // round(0.45 * 3000)
    for entry in &shared.chain.entries {
        let expected = (base_pos + 30 * entry.iteration) as usize;
        assert_eq!(entry.dataset.positives(), expected, "iteration {}", entry.iteration);
    }
    for pair in shared.chain.entries.windows(2) {
        assert!(pair[1].dataset.prevalence() > pair[0].dataset.prevalence());
    }
    // Correlation drift below 0.2 max-abs over the executed iterations.
    let output = &shared.output;
    let original = shared.chain.entries.iter().find(|e| e.iteration == 0).unwrap();
    let baseline = correlation_matrix(&original.dataset).unwrap();
    let mut max_drift: f64 = 0.0;
    for entry in &shared.chain.entries {
        if output.iterations.iter().any(|s| s.iteration == entry.iteration) {
            let drift = baseline.max_abs_diff(&correlation_matrix(&entry.dataset).unwrap());
            max_drift = max_drift.max(drift);
        }
    }
    assert!(max_drift < 0.2, "correlation drift {max_drift}");
    // The executed span comfortably covers the required prevalence range.
    let lo = output.iterations.first().unwrap().test_prevalence;
    let hi = output.iterations.last().unwrap().test_prevalence;
    assert!(lo <= 0.15 && hi >= 0.75, "span [{lo}, {hi}]");
    println!(
        "criterion 06 (constant n, exact prevalence ladder, drift {max_drift:.3} < 0.2, span [{lo:.2}, {hi:.2}]): PASS"
    );
}

#[test]
fn criterion_07_qualitative_rank_variance() {
    let shared = shared_sweep();
    let output = &shared.output;
    let report = rank_variance(&output.records).unwrap();
    let betas = default_betas();
    let models = ModelKind::all();
    // One variance entry per (metric, model): 22 metrics x 7 models.
    assert_eq!(report.entries.len(), 22 * 7);

    // (a) AUC has the smallest rank variance for at least 5 of 7 models.
    let mut ids = MetricId::threshold_metrics(&betas);
    ids.push(MetricId::Auc);
    let mut auc_min_count = 0;
    for model in models {
        let auc_var = report.entries[&(MetricId::Auc, model)].rank_variance;
        let min_other = ids
            .iter()
            .filter(|&&id| id != MetricId::Auc)
            .filter_map(|id| report.entries.get(&(*id, model)))
            .map(|e| e.rank_variance)
            .fold(f64::INFINITY, f64::min);
        if auc_var <= min_other + 1e-12 {
            auc_min_count += 1;
        }
    }
    assert!(auc_min_count >= 5, "AUC is the minimum for only {auc_min_count} models");

    // (b) Mean rank variance: prevalence-sensitive family exceeds the
    // stable family {BA, BI, Kappa, MCC, AUC}.
    let sensitive = prevalence_sensitive_metrics(&betas);
    let stable = [
        MetricId::BalancedAccuracy,
        MetricId::BookmakerInformedness,
        MetricId::CohensKappa,
        MetricId::Mcc,
        MetricId::Auc,
    ];
    let mean_of = |set: &[MetricId]| -> f64 {
        let mut values = Vec::new();
        for id in set {
            for model in models {
                if let Some(e) = report.entries.get(&(*id, model)) {
                    values.push(e.rank_variance);
                }
            }
        }
        values.iter().sum::<f64>() / values.len() as f64
    };
    let sensitive_mean = mean_of(&sensitive);
    let stable_mean = mean_of(&stable);
    assert!(
        sensitive_mean > stable_mean,
        "sensitive {sensitive_mean} vs stable {stable_mean}"
    );

    // (c) Random guess ranked last by AUC in at least 90% of iterations.
    let table = rank_table(&output.records).unwrap();
    let mut last = 0usize;
    let mut total = 0usize;
    for summary in &output.iterations {
        if let Some(outcome) = table.entries.get(&(summary.iteration, MetricId::Auc)) {
            total += 1;
            let rg = outcome
                .ranks
                .iter()
                .find(|(k, _)| *k == ModelKind::RandomGuess)
                .map(|(_, r)| *r)
                .unwrap_or(0.0);
            if rg >= 7.0 {
                last += 1;
            }
        }
    }
    let fraction = last as f64 / total as f64;
    assert!(fraction >= 0.9, "random guess last in only {last}/{total}");

    println!(
        "criterion 07 (AUC min variance for {auc_min_count}/7 models; family means {sensitive_mean:.2} > {stable_mean:.2}; random guess last by AUC in {:.0}% of iterations): PASS",
        100.0 * fraction
    );
}

#[test]
fn criterion_08_threshold_expansion_regression() {
    let shared = shared_sweep();
    let output = &shared.output;
    let betas = default_betas();
    let sensitive = prevalence_sensitive_metrics(&betas);
    let models = ModelKind::all();

    let mut negative_significant = 0usize;
    let mut total = 0usize;
    for model in models {
        for &id in &sensitive {
            let series = threshold_expansion_series(&output.records, model, id).unwrap();
            let counts: Vec<f64> = series.iter().map(|&(m, _)| m as f64).collect();
            let variances: Vec<f64> = series.iter().map(|&(_, v)| v).collect();
            let fit = ols(&variances, &design_with_intercept(&counts)).unwrap();
            total += 1;
            if fit.coefficients[1] < 0.0 && fit.p_values[1] < 0.05 {
                negative_significant += 1;
            }
        }
    }
    let fraction = negative_significant as f64 / total as f64;
    assert!(fraction >= 0.75, "negative significant slope in {negative_significant}/{total}");

    // AUC ignores thresholds: its expansion series is exactly constant.
    for model in models {
        let series = threshold_expansion_series(&output.records, model, MetricId::Auc).unwrap();
        let first = series[0].1;
        assert!(series.len() > 1);
        for &(_, v) in &series {
            assert_eq!(v.to_bits(), first.to_bits(), "AUC series moved for {model:?}");
        }
    }
    println!(
        "criterion 08 (variance-vs-threshold-count slope negative at p<0.05 for {negative_significant}/{total} = {:.0}% of pairs; AUC series exactly constant): PASS",
        100.0 * fraction
    );
}

#[test]
fn criterion_09_numerics() {
    // Chi-square closed form at k = 2.
    for &x in &[0.25, 1.0, 2.0, 5.0, 12.0] {
        let want = 1.0 - (-x / 2.0f64).exp();
        assert!((chi_square_cdf(x, 2.0) - want).abs() <= 1e-12);
    }
    // Student-t symmetry.
    for &df in &[1.0, 4.0, 9.0, 33.0] {
        assert_eq!(t_cdf(0.0, df), 0.5);
        for &x in &[0.4, 1.3, 3.5] {
            assert!((t_cdf(-x, df) + t_cdf(x, df) - 1.0).abs() <= 1e-12);
        }
    }
    // F CDF against an adaptive-Simpson quadrature oracle at 20 spot points
    // (u = sqrt(x) substitution removes the d1 = 1 endpoint singularity).
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
        fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, eps: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (l, r) = (rule(f, a, m), rule(f, m, b));
            if depth == 0 || (l + r - whole).abs() < 15.0 * eps {
                l + r + (l + r - whole) / 15.0
            } else {
                go(f, a, m, l, eps / 2.0, depth - 1) + go(f, m, b, r, eps / 2.0, depth - 1)
            }
        }
        go(f, a, b, rule(f, a, b), eps, depth)
    }
    let spots: [(f64, f64, f64); 20] = [
        (0.5, 1.0, 1.0),
        (1.0, 1.0, 3.0),
        (2.0, 1.0, 8.0),
        (0.7, 2.0, 2.0),
        (1.3, 2.0, 12.0),
        (2.8, 3.0, 5.0),
        (0.4, 4.0, 9.0),
        (1.0, 5.0, 5.0),
        (2.2, 5.0, 22.0),
        (0.9, 6.0, 11.0),
        (3.6, 6.0, 6.0),
        (1.15, 8.0, 27.0),
        (0.85, 10.0, 10.0),
        (2.4, 10.0, 35.0),
        (4.8, 12.0, 7.0),
        (0.35, 15.0, 120.0),
        (1.05, 20.0, 20.0),
        (3.1, 25.0, 45.0),
        (0.97, 40.0, 40.0),
        (1.7, 60.0, 100.0),
    ];
    let mut worst: f64 = 0.0;
    for &(x, d1, d2) in &spots {
        let density = move |u: f64| {
            let v = u * u;
            if v <= 0.0 {
                return 0.0;
            }
            let ln = 0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * v.ln()
                - 0.5 * (d1 + d2) * (1.0 + d1 * v / d2).ln()
                - (ln_gamma(0.5 * d1) + ln_gamma(0.5 * d2) - ln_gamma(0.5 * (d1 + d2)));
            ln.exp() * 2.0 * u
        };
        let oracle = simpson(&density, 0.0, x.sqrt(), 1e-13, 40);
        let diff = (f_cdf(x, d1, d2) - oracle).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-8, "F({x}; {d1}, {d2}): diff {diff}");
    }

    // Logistic-regression analytic gradient vs central differences, at
    // random parameter points on a synthetic instance.
    let config = RunConfig::default();
    let ds = prevsweep_core::dataset::synth_dataset(200, 4, 0.4, 0.6, Seed(config.seed)).unwrap();
    let x = ds.features();
    let mut rng = Seed(0xacc9).rng();
    let mut worst_grad: f64 = 0.0;
    for _ in 0..5 {
        let w: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: f64 = rng.random_range(-1.0..1.0);
        let (_, grad_w, grad_b) = loss_and_gradient(x, ds.labels(), &w, b, 1e-3);
        let eps = 1e-5;
        for i in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += eps;
            wm[i] -= eps;
            let (lp, _, _) = loss_and_gradient(x, ds.labels(), &wp, b, 1e-3);
            let (lm, _, _) = loss_and_gradient(x, ds.labels(), &wm, b, 1e-3);
            let numeric = (lp - lm) / (2.0 * eps);
            let rel = (numeric - grad_w[i]).abs() / grad_w[i].abs().max(1.0);
            worst_grad = worst_grad.max(rel);
            assert!(rel <= 1e-5, "gradient {i}: analytic {} vs numeric {numeric}", grad_w[i]);
        }
        let (lp, _, _) = loss_and_gradient(x, ds.labels(), &w, b + eps, 1e-3);
        let (lm, _, _) = loss_and_gradient(x, ds.labels(), &w, b - eps, 1e-3);
        let rel = ((lp - lm) / (2.0 * eps) - grad_b).abs() / grad_b.abs().max(1.0);
        worst_grad = worst_grad.max(rel);
        assert!(rel <= 1e-5);
    }
    println!(
        "criterion 09 (closed forms exact; F CDF vs quadrature max diff {worst:.2e} <= 1e-8; gradient check max rel err {worst_grad:.2e} <= 1e-5): PASS"
    );
}

#[test]
fn criterion_10_sweep_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        seed: 7,
        out_dir: dir.path().join("run"),
        step: 25,
        max_down: 3,
        max_up: 3,
        cv_folds: 3,
        synth_n: 500,
        synth_features: 3,
        synth_separation: 0.8,
        models: vec!["GLM".into(), "GBM".into(), "KNN".into(), "randomguess".into()],
        gbm_rounds_grid: vec![25],
        ..RunConfig::default()
    };
    let a = run_sweep_command(&config).unwrap();
    let snapshots: Vec<(String, Vec<u8>)> = a
        .files
        .iter()
        .map(|f| (f.to_string(), std::fs::read(a.out_dir.join(f)).unwrap()))
        .collect();
    // Identical config and seed, run again (overwrites in place).
    let b = run_sweep_command(&config).unwrap();
    assert_eq!(a.files, b.files);
    for (file, bytes) in &snapshots {
        assert_eq!(
            &std::fs::read(b.out_dir.join(file)).unwrap(),
            bytes,
            "{file} differs between identical runs"
        );
    }
    // A different seed must not reproduce the records.
    let other = RunConfig { seed: 8, out_dir: dir.path().join("other"), ..config };
    let c = run_sweep_command(&other).unwrap();
    assert!(
        !files_identical(&a.out_dir.join("records.csv"), &c.out_dir.join("records.csv")).unwrap()
    );
    println!("criterion 10 (byte-identical outputs incl. records.csv across reruns with identical config and seed): PASS");
}

/// Supporting statistical check behind criterion 7: the three variance-
/// homogeneity tests all reject equality of rank spread between the two
/// metric families on the shared sweep.
#[test]
fn variance_homogeneity_tests_reject_on_shared_sweep() {
    let shared = shared_sweep();
    let betas = default_betas();
    let comparison = rank_spread_tests(
        &shared.output.records,
        &prevalence_sensitive_metrics(&betas),
        &prevalence_stable_metrics(),
    )
    .unwrap();
    for result in [&comparison.f, &comparison.bartlett, &comparison.levene] {
        assert!(
            result.p_value < 0.05,
            "{} test p = {}",
            result.test_name,
            result.p_value
        );
    }
    println!(
        "supporting check (rank-spread F/Bartlett/Levene all reject at p<0.05: {:.1e} / {:.1e} / {:.1e}): PASS",
        comparison.f.p_value, comparison.bartlett.p_value, comparison.levene.p_value
    );
}
