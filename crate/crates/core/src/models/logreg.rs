//! Batch gradient-descent logistic regression on log-loss with a small L2
//! term and backtracking line search. Features are standardized internally;
//! the intercept is unpenalized. Separable data is kept finite by the L2
//! term.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::linalg::Matrix;
use crate::models::Standardizer;

const MAX_ITERS: usize = 500;
const GRAD_TOL: f64 = 1e-8;
const ARMIJO_C: f64 = 1e-4;

/// Optimizer outcome, reported alongside the fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// Whether the gradient-norm tolerance was reached.
    pub converged: bool,
    /// Iterations used.
    pub iterations: usize,
    /// Final gradient norm.
    pub gradient_norm: f64,
}

/// Fitted logistic regression.
#[derive(Debug, Clone)]
pub struct LogRegModel {
    standardizer: Standardizer,
    weights: Vec<f64>,
    intercept: f64,
    /// Optimizer diagnostics for this fit.
    pub diagnostics: FitDiagnostics,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(x)) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Mean log-loss plus L2 penalty, and its analytic gradient, at parameters
/// (`weights`, `intercept`) on an (already standardized) feature matrix.
///
/// Returned as (loss, weight gradient, intercept gradient). Public so the
/// gradient can be verified against finite differences from outside.
pub fn loss_and_gradient(
    x: &Matrix,
    y: &[u8],
    weights: &[f64],
    intercept: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let m = x.rows() as f64;
    let d = x.cols();
    let mut loss = 0.0;
    let mut grad_w = alloc::vec![0.0; d];
    let mut grad_b = 0.0;
    for r in 0..x.rows() {
        let row = x.row(r);
        let z = intercept + row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
        let yi = y[r] as f64;
        loss += softplus(z) - yi * z;
        let err = sigmoid(z) - yi;
        for (g, &v) in grad_w.iter_mut().zip(row) {
            *g += err * v;
        }
        grad_b += err;
    }
    loss /= m;
    grad_b /= m;
    let mut penalty = 0.0;
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / m + l2 * w;
        penalty += w * w;
    }
    loss += 0.5 * l2 * penalty;
    (loss, grad_w, grad_b)
}

/// Fit by gradient descent with Armijo backtracking, stopping at gradient
/// norm < 1e-8 or 500 iterations.
pub(crate) fn fit(x: &Matrix, y: &[u8], l2: f64) -> LogRegModel {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let d = xs.cols();
    let mut weights = alloc::vec![0.0; d];
    let mut intercept = 0.0;
    let mut step: f64 = 1.0;
    let mut diagnostics =
        FitDiagnostics { converged: false, iterations: 0, gradient_norm: f64::INFINITY };

    let (mut loss, mut grad_w, mut grad_b) = loss_and_gradient(&xs, y, &weights, intercept, l2);
    for iter in 0..MAX_ITERS {
        let grad_sq: f64 = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        let grad_norm = grad_sq.sqrt();
        diagnostics.iterations = iter;
        diagnostics.gradient_norm = grad_norm;
        if grad_norm < GRAD_TOL {
            diagnostics.converged = true;
            break;
        }
        // Backtrack until the Armijo condition holds.
        step = (step * 2.0).min(1e4);
        let mut accepted = false;
        while step > 1e-18 {
            let cand_w: Vec<f64> =
                weights.iter().zip(&grad_w).map(|(w, g)| w - step * g).collect();
            let cand_b = intercept - step * grad_b;
            let (cand_loss, cand_gw, cand_gb) = loss_and_gradient(&xs, y, &cand_w, cand_b, l2);
            if cand_loss <= loss - ARMIJO_C * step * grad_sq {
                weights = cand_w;
                intercept = cand_b;
                loss = cand_loss;
                grad_w = cand_gw;
                grad_b = cand_gb;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step size underflowed; nothing more to gain at f64 precision.
            break;
        }
    }
    LogRegModel { standardizer, weights, intercept, diagnostics }
}

impl LogRegModel {
    pub(crate) fn width(&self) -> usize {
        self.standardizer.width()
    }

    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        let xs = self.standardizer.transform(features);
        (0..xs.rows())
            .map(|r| {
                let z = self.intercept
                    + xs.row(r).iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>();
                sigmoid(z)
            })
            .collect()
    }

    /// Model with all-zero parameters over `width` features; scores are
    /// exactly 0.5 everywhere. Useful as a fixture.
    pub fn zeroed(width: usize) -> LogRegModel {
        LogRegModel {
            standardizer: Standardizer::fit(&Matrix::zeros(2, width)),
            weights: alloc::vec![0.0; width],
            intercept: 0.0,
            diagnostics: FitDiagnostics { converged: true, iterations: 0, gradient_norm: 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_dataset;
    use crate::seed::Seed;

    #[test]
    fn zero_parameters_score_half() {
        let model = LogRegModel::zeroed(3);
        let x = Matrix::from_rows(&[&[1.0, -2.0, 0.3], &[4.0, 0.0, -1.0]]);
        for s in model.predict(&x) {
            assert_eq!(s, 0.5);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let ds = synth_dataset(80, 3, 0.4, 0.7, Seed(12)).unwrap();
        let x = Standardizer::fit(ds.features()).transform(ds.features());
        let y = ds.labels();
        let l2 = 1e-3;
        // A handful of random-ish parameter points.
        let points = [
            (alloc::vec![0.0, 0.0, 0.0], 0.0),
            (alloc::vec![0.5, -1.2, 0.3], 0.2),
            (alloc::vec![-2.0, 0.7, 1.5], -0.9),
        ];
        let eps = 1e-5;
        for (w, b) in points {
            let (_, grad_w, grad_b) = loss_and_gradient(&x, y, &w, b, l2);
            for i in 0..w.len() {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[i] += eps;
                wm[i] -= eps;
                let (lp, _, _) = loss_and_gradient(&x, y, &wp, b, l2);
                let (lm, _, _) = loss_and_gradient(&x, y, &wm, b, l2);
                let numeric = (lp - lm) / (2.0 * eps);
                let denom = grad_w[i].abs().max(1.0);
                assert!(
                    (numeric - grad_w[i]).abs() / denom < 1e-5,
                    "weight {i}: analytic {} vs numeric {numeric}",
                    grad_w[i]
                );
            }
            let (lp, _, _) = loss_and_gradient(&x, y, &w, b + eps, l2);
            let (lm, _, _) = loss_and_gradient(&x, y, &w, b - eps, l2);
            let numeric = (lp - lm) / (2.0 * eps);
            assert!((numeric - grad_b).abs() / grad_b.abs().max(1.0) < 1e-5);
        }
    }

    #[test]
    fn converges_on_easy_data() {
        let ds = synth_dataset(200, 2, 0.5, 1.0, Seed(3)).unwrap();
        let model = fit(ds.features(), ds.labels(), 1e-6);
        assert!(model.diagnostics.converged || model.diagnostics.gradient_norm < 1e-4);
    }

    #[test]
    fn separable_data_stays_finite() {
        // Perfectly separable in one feature; the L2 term bounds the weights.
        let x = Matrix::from_rows(&[
            &[-2.0],
            &[-1.5],
            &[-1.0],
            &[1.0],
            &[1.5],
            &[2.0],
        ]);
        let y = [0, 0, 0, 1, 1, 1];
        let model = fit(&x, &y, 1e-6);
        assert!(model.weights.iter().all(|w| w.is_finite()));
        assert!(model.intercept.is_finite());
        let scores = model.predict(&x);
        assert!(scores[0] < 0.5 && scores[5] > 0.5);
    }
}
