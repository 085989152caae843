//! Everything downstream of the evaluation records: fractional ranking of
//! models, variance of ranks and values across prevalence, variance-
//! homogeneity tests (two-sample F, Bartlett, Levene), threshold-expansion
//! variance series, and OLS regression with standard errors and p-values.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use thiserror::Error;

use crate::dist::{chi_square_cdf, f_cdf, t_cdf};
use crate::linalg::{least_squares, LinalgError, Matrix};
use crate::metrics::{MetricId, Orientation};
use crate::models::ModelKind;
use crate::sweep::{EvalRecord, Threshold};

/// Errors from the analysis operations.
#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    /// Fewer than two values where a variance is required.
    #[error("need at least {required} observations, got {got}")]
    TooFewObservations {
        /// Minimum required.
        required: usize,
        /// Actual count.
        got: usize,
    },
    /// A statistic divides by a within-group variance that is zero.
    #[error("zero within-group variance in group {group}")]
    ZeroVariance {
        /// Offending group index.
        group: usize,
    },
    /// Fewer than two groups supplied to a k-group test.
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    /// Fewer than two models supplied to a ranking.
    #[error("need at least 2 models to rank, got {0}")]
    TooFewModels(usize),
    /// No records matched a query.
    #[error("no records for the requested selection")]
    NoRecords,
    /// Design-matrix failure in OLS.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// OLS needs more rows than columns.
    #[error("OLS needs rows > columns, got {rows} rows for {cols} columns")]
    NotEnoughRows {
        /// Row count.
        rows: usize,
        /// Column count.
        cols: usize,
    },
}

/// Sample variance (n - 1 denominator). None for fewer than two values.
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
}

/// Fractional ranks of models by value, best = rank 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOutcome<K> {
    /// Rank per key; tied values share the mean of their positional ranks.
    pub ranks: Vec<(K, f64)>,
    /// Keys whose value was undefined (NaN) and were left unranked.
    pub excluded: Vec<K>,
}

/// Fractionally rank models by metric value. Orientation-aware: with
/// `HigherIsBetter` the largest value gets rank 1, with `LowerIsBetter` the
/// smallest. Ties share the mean of the positional ranks they span.
/// Undefined (NaN) values are excluded and reported; infinite values rank
/// above every finite value.
pub fn rank_models<K: Copy + Ord>(
    values: &[(K, f64)],
    orientation: Orientation,
) -> Result<RankOutcome<K>, AnalysisError> {
    if values.len() < 2 {
        return Err(AnalysisError::TooFewModels(values.len()));
    }
    let mut excluded: Vec<K> = Vec::new();
    let mut ranked: Vec<(K, f64)> = Vec::new();
    for &(k, v) in values {
        if v.is_nan() {
            excluded.push(k);
        } else {
            ranked.push((k, v));
        }
    }
    match orientation {
        Orientation::HigherIsBetter => ranked.sort_by(|a, b| b.1.total_cmp(&a.1)),
        Orientation::LowerIsBetter => ranked.sort_by(|a, b| a.1.total_cmp(&b.1)),
    }
    let mut ranks: Vec<(K, f64)> = Vec::with_capacity(ranked.len());
    let mut i = 0;
    while i < ranked.len() {
        let mut j = i + 1;
        while j < ranked.len() && ranked[j].1 == ranked[i].1 {
            j += 1;
        }
        // Positions i..j (0-based) share the mean of ranks i+1..=j.
        let shared = (i + 1 + j) as f64 / 2.0;
        for item in &ranked[i..j] {
            ranks.push((item.0, shared));
        }
        i = j;
    }
    ranks.sort_by_key(|&(k, _)| k);
    Ok(RankOutcome { ranks, excluded })
}

/// Fractional ranks per (iteration, metric), built from the cutoff records
/// (threshold 0.5) and the AUC records.
#[derive(Debug, Clone, Default)]
pub struct RankTable {
    /// Rank outcome per (iteration, metric).
    pub entries: BTreeMap<(i64, MetricId), RankOutcome<ModelKind>>,
}

/// Metric values per (iteration, metric, model) at the ranking thresholds:
/// 0.5 for confusion-matrix metrics, ALL for AUC.
pub fn value_table(records: &[EvalRecord]) -> BTreeMap<(i64, MetricId), Vec<(ModelKind, f64)>> {
    let mut table: BTreeMap<(i64, MetricId), Vec<(ModelKind, f64)>> = BTreeMap::new();
    for r in records {
        let at_ranking_threshold = match r.threshold {
            Threshold::All => r.metric == MetricId::Auc,
            Threshold::Value(t) => t == 0.5,
        };
        if at_ranking_threshold {
            table.entry((r.iteration, r.metric)).or_default().push((r.model, r.value));
        }
    }
    table
}

/// Rank every (iteration, metric) cell of the record set.
pub fn rank_table(records: &[EvalRecord]) -> Result<RankTable, AnalysisError> {
    let mut table = RankTable::default();
    for (key, values) in value_table(records) {
        let outcome = rank_models(&values, key.1.orientation())?;
        table.entries.insert(key, outcome);
    }
    if table.entries.is_empty() {
        return Err(AnalysisError::NoRecords);
    }
    Ok(table)
}

/// Variance of a model's rank and value across iterations, per metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEntry {
    /// Sample variance of the fractional rank across iterations.
    pub rank_variance: f64,
    /// Sample variance of the metric value across iterations (finite
    /// observations only).
    pub value_variance: f64,
    /// Iterations contributing a rank.
    pub rank_observations: usize,
    /// Iterations contributing a finite value.
    pub value_observations: usize,
}

/// Rank/value variance across prevalence for every (metric, model).
#[derive(Debug, Clone)]
pub struct VarianceReport {
    /// Distinct iterations in the record set.
    pub n_iterations: usize,
    /// Per (metric, model) variances.
    pub entries: BTreeMap<(MetricId, ModelKind), VarianceEntry>,
}

/// Build the variance report from records: rank each (iteration, metric)
/// cell, then take the sample variance of each model's rank and value
/// across iterations. Requires at least two iterations.
pub fn rank_variance(records: &[EvalRecord]) -> Result<VarianceReport, AnalysisError> {
    let values = value_table(records);
    let table = rank_table(records)?;
    let mut iterations: Vec<i64> = table.entries.keys().map(|&(i, _)| i).collect();
    iterations.sort_unstable();
    iterations.dedup();
    if iterations.len() < 2 {
        return Err(AnalysisError::TooFewObservations { required: 2, got: iterations.len() });
    }

    let mut rank_series: BTreeMap<(MetricId, ModelKind), Vec<f64>> = BTreeMap::new();
    for (&(_, metric), outcome) in &table.entries {
        for &(model, rank) in &outcome.ranks {
            rank_series.entry((metric, model)).or_default().push(rank);
        }
    }
    let mut value_series: BTreeMap<(MetricId, ModelKind), Vec<f64>> = BTreeMap::new();
    for (&(_, metric), cells) in &values {
        for &(model, value) in cells {
            if value.is_finite() {
                value_series.entry((metric, model)).or_default().push(value);
            }
        }
    }

    let mut entries = BTreeMap::new();
    for (key, ranks) in rank_series {
        let rank_var = sample_variance(&ranks).ok_or(AnalysisError::TooFewObservations {
            required: 2,
            got: ranks.len(),
        })?;
        let values = value_series.get(&key).map(Vec::as_slice).unwrap_or(&[]);
        let value_var = sample_variance(values).unwrap_or(f64::NAN);
        entries.insert(
            key,
            VarianceEntry {
                rank_variance: rank_var,
                value_variance: value_var,
                rank_observations: ranks.len(),
                value_observations: values.len(),
            },
        );
    }
    Ok(VarianceReport { n_iterations: iterations.len(), entries })
}

/// Outcome of one statistical test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// Test name.
    pub test_name: &'static str,
    /// Test statistic.
    pub statistic: f64,
    /// Two-sided p-value in [0, 1].
    pub p_value: f64,
    /// First degrees of freedom.
    pub df1: f64,
    /// Second degrees of freedom, for F-shaped statistics.
    pub df2: Option<f64>,
}

/// Two-sample F-test for equality of variances. The statistic is the ratio
/// of the larger sample variance to the smaller (so it is always >= 1) with
/// degrees of freedom ordered accordingly; the p-value is two-sided.
pub fn f_test_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult, AnalysisError> {
    if a.len() < 2 {
        return Err(AnalysisError::TooFewObservations { required: 2, got: a.len() });
    }
    if b.len() < 2 {
        return Err(AnalysisError::TooFewObservations { required: 2, got: b.len() });
    }
    let var_a = sample_variance(a).unwrap();
    let var_b = sample_variance(b).unwrap();
    if var_a == 0.0 {
        return Err(AnalysisError::ZeroVariance { group: 0 });
    }
    if var_b == 0.0 {
        return Err(AnalysisError::ZeroVariance { group: 1 });
    }
    let (num, den, df1, df2) = if var_a >= var_b {
        (var_a, var_b, (a.len() - 1) as f64, (b.len() - 1) as f64)
    } else {
        (var_b, var_a, (b.len() - 1) as f64, (a.len() - 1) as f64)
    };
    let statistic = num / den;
    let p_value = (2.0 * (1.0 - f_cdf(statistic, df1, df2))).clamp(0.0, 1.0);
    Ok(TestResult { test_name: "F", statistic, p_value, df1, df2: Some(df2) })
}

fn validate_groups<S: AsRef<[f64]>>(groups: &[S]) -> Result<(), AnalysisError> {
    if groups.len() < 2 {
        return Err(AnalysisError::TooFewGroups(groups.len()));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.as_ref().len() < 2 {
            return Err(AnalysisError::TooFewObservations { required: 2, got: g.as_ref().len() });
        }
        let _ = i;
    }
    Ok(())
}

/// Bartlett's test for equal variances across k groups; chi-square p-value
/// with k - 1 degrees of freedom.
pub fn bartlett_test<S: AsRef<[f64]>>(groups: &[S]) -> Result<TestResult, AnalysisError> {
    validate_groups(groups)?;
    let k = groups.len() as f64;
    let n_total: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let n_total = n_total as f64;
    let mut pooled = 0.0;
    let mut ln_sum = 0.0;
    let mut inv_sum = 0.0;
    for (i, g) in groups.iter().enumerate() {
        let g = g.as_ref();
        let ni = g.len() as f64;
        let var = sample_variance(g).unwrap();
        if var == 0.0 {
            return Err(AnalysisError::ZeroVariance { group: i });
        }
        pooled += (ni - 1.0) * var;
        ln_sum += (ni - 1.0) * var.ln();
        inv_sum += 1.0 / (ni - 1.0);
    }
    let pooled = pooled / (n_total - k);
    let correction = 1.0 + (inv_sum - 1.0 / (n_total - k)) / (3.0 * (k - 1.0));
    let statistic = ((n_total - k) * pooled.ln() - ln_sum) / correction;
    let p_value = (1.0 - chi_square_cdf(statistic.max(0.0), k - 1.0)).clamp(0.0, 1.0);
    Ok(TestResult { test_name: "Bartlett", statistic, p_value, df1: k - 1.0, df2: None })
}

/// Levene's test (classic mean-centered variant) for equal variances across
/// k groups; F-shaped p-value with (k - 1, N - k) degrees of freedom.
pub fn levene_test<S: AsRef<[f64]>>(groups: &[S]) -> Result<TestResult, AnalysisError> {
    validate_groups(groups)?;
    let k = groups.len() as f64;
    let n_total: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let n_total = n_total as f64;

    // Absolute deviations from each group mean.
    let mut z_groups: Vec<Vec<f64>> = Vec::with_capacity(groups.len());
    for g in groups {
        let g = g.as_ref();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        z_groups.push(g.iter().map(|v| (v - mean).abs()).collect());
    }
    let z_grand: f64 =
        z_groups.iter().flat_map(|z| z.iter()).sum::<f64>() / n_total;
    let mut between = 0.0;
    let mut within = 0.0;
    for z in &z_groups {
        let ni = z.len() as f64;
        let z_mean = z.iter().sum::<f64>() / ni;
        between += ni * (z_mean - z_grand) * (z_mean - z_grand);
        within += z.iter().map(|v| (v - z_mean) * (v - z_mean)).sum::<f64>();
    }
    if within == 0.0 {
        return Err(AnalysisError::ZeroVariance { group: 0 });
    }
    let statistic = ((n_total - k) / (k - 1.0)) * (between / within);
    let p_value = (1.0 - f_cdf(statistic, k - 1.0, n_total - k)).clamp(0.0, 1.0);
    Ok(TestResult { test_name: "Levene", statistic, p_value, df1: k - 1.0, df2: Some(n_total - k) })
}

/// The three variance-homogeneity tests applied to two metric families.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTypeComparison {
    /// Two-sample F-test on the pooled rank observations of each family.
    pub f: TestResult,
    /// Bartlett across one group per (family, model).
    pub bartlett: TestResult,
    /// Levene across one group per (family, model).
    pub levene: TestResult,
}

/// Test whether model ranks under one family of metrics spread differently
/// across prevalence than under another family.
///
/// Each (metric, model) rank series is centered on its own mean first, so
/// the tests see rank variability across prevalence rather than the
/// between-model spread of mean ranks (which is the same ~1..M ladder for
/// every family and would mask the effect). The F-test compares the two
/// pooled centered samples; Bartlett and Levene see one group per
/// (family, model) pair, which is the interaction grouping.
pub fn rank_spread_tests(
    records: &[EvalRecord],
    family_a: &[MetricId],
    family_b: &[MetricId],
) -> Result<MetricTypeComparison, AnalysisError> {
    let table = rank_table(records)?;
    let mut series: BTreeMap<(usize, MetricId, ModelKind), Vec<f64>> = BTreeMap::new();
    for (&(_, metric), outcome) in &table.entries {
        let family = if family_a.contains(&metric) {
            0
        } else if family_b.contains(&metric) {
            1
        } else {
            continue;
        };
        for &(model, rank) in &outcome.ranks {
            series.entry((family, metric, model)).or_default().push(rank);
        }
    }
    let mut pool_a: Vec<f64> = Vec::new();
    let mut pool_b: Vec<f64> = Vec::new();
    let mut groups: BTreeMap<(usize, ModelKind), Vec<f64>> = BTreeMap::new();
    for (&(family, _, model), ranks) in &series {
        let mean = ranks.iter().sum::<f64>() / ranks.len() as f64;
        for &rank in ranks {
            let centered = rank - mean;
            if family == 0 {
                pool_a.push(centered);
            } else {
                pool_b.push(centered);
            }
            groups.entry((family, model)).or_default().push(centered);
        }
    }
    if pool_a.is_empty() || pool_b.is_empty() {
        return Err(AnalysisError::NoRecords);
    }
    let group_list: Vec<Vec<f64>> = groups.into_values().collect();
    Ok(MetricTypeComparison {
        f: f_test_two_sample(&pool_a, &pool_b)?,
        bartlett: bartlett_test(&group_list)?,
        levene: levene_test(&group_list)?,
    })
}

/// Variance-across-prevalence of the running threshold average, as the
/// threshold set expands outward from 0.5.
///
/// For each iteration the metric's thresholds are ordered by distance from
/// 0.5 (ties: lower threshold first) and averaged over the first m of them
/// (non-finite values are skipped); the series reports, for every m up to
/// the largest threshold count, the sample variance of that average across
/// iterations. AUC has no thresholds, so its running average is its single
/// value and the series is exactly constant.
pub fn threshold_expansion_series(
    records: &[EvalRecord],
    model: ModelKind,
    metric: MetricId,
) -> Result<Vec<(usize, f64)>, AnalysisError> {
    // Threshold count per iteration is metric-independent; AUC borrows the
    // grid size from the confusion-matrix records of the same model.
    let mut grid_sizes: BTreeMap<i64, usize> = BTreeMap::new();
    let mut grid_probe: BTreeMap<(i64, MetricId), usize> = BTreeMap::new();
    for r in records {
        if r.model == model {
            if let Threshold::Value(_) = r.threshold {
                *grid_probe.entry((r.iteration, r.metric)).or_default() += 1;
            }
        }
    }
    for (&(iteration, _), &count) in &grid_probe {
        let size = grid_sizes.entry(iteration).or_default();
        *size = (*size).max(count);
    }
    if grid_sizes.is_empty() {
        return Err(AnalysisError::NoRecords);
    }
    let t_max = grid_sizes.values().copied().max().unwrap();

    // Per iteration: running means over the distance-ordered thresholds.
    let mut per_iteration: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    if metric == MetricId::Auc {
        for r in records {
            if r.model == model && r.metric == MetricId::Auc && r.value.is_finite() {
                per_iteration.insert(r.iteration, alloc::vec![r.value]);
            }
        }
    } else {
        let mut grids: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
        for r in records {
            if r.model == model && r.metric == metric {
                if let Threshold::Value(t) = r.threshold {
                    grids.entry(r.iteration).or_default().push((t, r.value));
                }
            }
        }
        for (iteration, mut grid) in grids {
            grid.sort_by(|a, b| {
                let da = (a.0 - 0.5).abs();
                let db = (b.0 - 0.5).abs();
                da.total_cmp(&db).then(a.0.total_cmp(&b.0))
            });
            let mut running = Vec::with_capacity(grid.len());
            let mut sum = 0.0;
            let mut count = 0usize;
            for &(_, value) in &grid {
                if value.is_finite() {
                    sum += value;
                    count += 1;
                }
                running.push(if count > 0 { sum / count as f64 } else { f64::NAN });
            }
            per_iteration.insert(iteration, running);
        }
    }

    let mut series = Vec::with_capacity(t_max);
    for m in 1..=t_max {
        let snapshot: Vec<f64> = per_iteration
            .values()
            .filter_map(|running| {
                let at = m.min(running.len());
                let v = running[at - 1];
                v.is_finite().then_some(v)
            })
            .collect();
        let variance = sample_variance(&snapshot)
            .ok_or(AnalysisError::TooFewObservations { required: 2, got: snapshot.len() })?;
        series.push((m, variance));
    }
    Ok(series)
}

/// OLS fit with coefficient standard errors, t statistics, and two-sided
/// p-values from the Student t distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Coefficient estimates, one per design column.
    pub coefficients: Vec<f64>,
    /// Standard error per coefficient.
    pub standard_errors: Vec<f64>,
    /// t statistic per coefficient.
    pub t_values: Vec<f64>,
    /// Two-sided p-value per coefficient.
    pub p_values: Vec<f64>,
    /// Residual variance RSS / (n - p).
    pub residual_variance: f64,
    /// Residual degrees of freedom n - p.
    pub df_residual: usize,
}

/// Ordinary least squares of `y` on a design matrix that already includes
/// its intercept column. Requires more rows than columns and full column
/// rank.
pub fn ols(y: &[f64], x: &Matrix) -> Result<OlsFit, AnalysisError> {
    let n = x.rows();
    let p = x.cols();
    if n <= p {
        return Err(AnalysisError::NotEnoughRows { rows: n, cols: p });
    }
    if y.len() != n {
        return Err(AnalysisError::NotEnoughRows { rows: y.len(), cols: p });
    }
    let fit = least_squares(x, y)?;
    let mut rss = 0.0;
    for r in 0..n {
        let predicted: f64 =
            x.row(r).iter().zip(&fit.coefficients).map(|(a, b)| a * b).sum();
        let e = y[r] - predicted;
        rss += e * e;
    }
    let df_residual = n - p;
    let residual_variance = rss / df_residual as f64;
    let mut standard_errors = Vec::with_capacity(p);
    let mut t_values = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = (residual_variance * fit.xtx_inverse.get(j, j)).sqrt();
        let t = fit.coefficients[j] / se;
        standard_errors.push(se);
        t_values.push(t);
        p_values.push(if t.is_finite() {
            (2.0 * (1.0 - t_cdf(t.abs(), df_residual as f64))).clamp(0.0, 1.0)
        } else {
            f64::NAN
        });
    }
    Ok(OlsFit {
        coefficients: fit.coefficients,
        standard_errors,
        t_values,
        p_values,
        residual_variance,
        df_residual,
    })
}

/// Design matrix [1, x] for a simple regression.
pub fn design_with_intercept(xs: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(xs.len(), 2);
    for (i, &v) in xs.iter().enumerate() {
        m.set(i, 0, 1.0);
        m.set(i, 1, v);
    }
    m
}
