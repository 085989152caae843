//! Linear discriminant analysis with a pooled within-class covariance,
//! ridge-inflated for invertibility, and class priors from training
//! prevalence. The posterior reduces to a sigmoid of an affine score.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::linalg::{Cholesky, Matrix};
use crate::models::ModelError;

/// Fitted LDA: the Gaussian discriminant collapsed to `sigmoid(w.x + b)`.
#[derive(Debug, Clone)]
pub struct LdaModel {
    weights: Vec<f64>,
    intercept: f64,
}

pub(crate) fn fit(x: &Matrix, y: &[u8], ridge: f64) -> Result<LdaModel, ModelError> {
    let n = x.rows();
    let d = x.cols();
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ModelError::SingleClass { positives: n_pos, negatives: n_neg });
    }

    let mut mean_pos = alloc::vec![0.0; d];
    let mut mean_neg = alloc::vec![0.0; d];
    for r in 0..n {
        let target = if y[r] == 1 { &mut mean_pos } else { &mut mean_neg };
        for (t, &v) in target.iter_mut().zip(x.row(r)) {
            *t += v;
        }
    }
    for m in mean_pos.iter_mut() {
        *m /= n_pos as f64;
    }
    for m in mean_neg.iter_mut() {
        *m /= n_neg as f64;
    }

    // Pooled within-class scatter, normalized by n - 2 when possible.
    let mut cov = Matrix::zeros(d, d);
    for r in 0..n {
        let mean = if y[r] == 1 { &mean_pos } else { &mean_neg };
        let row = x.row(r);
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in 0..=i {
                let dj = row[j] - mean[j];
                let v = cov.get(i, j) + di * dj;
                cov.set(i, j, v);
            }
        }
    }
    let denom = if n > 2 { (n - 2) as f64 } else { 1.0 };
    let mut trace = 0.0;
    for i in 0..d {
        for j in 0..=i {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
        trace += cov.get(i, i);
    }
    // Ridge inflation keeps the factorization well-posed even with
    // collinear or constant features.
    let lambda = if trace > 0.0 { ridge * trace / d as f64 } else { ridge };
    for i in 0..d {
        cov.set(i, i, cov.get(i, i) + lambda);
    }

    let chol = Cholesky::new(&cov).expect("ridge-inflated covariance must be SPD");
    let diff: Vec<f64> = mean_pos.iter().zip(&mean_neg).map(|(p, q)| p - q).collect();
    let weights = chol.solve(&diff).expect("dimension checked above");
    let mid_dot: f64 = mean_pos
        .iter()
        .zip(&mean_neg)
        .zip(&weights)
        .map(|((p, q), w)| 0.5 * (p + q) * w)
        .sum();
    let prior = (n_pos as f64 / n_neg as f64).ln();
    Ok(LdaModel { weights, intercept: prior - mid_dot })
}

impl LdaModel {
    pub(crate) fn width(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        (0..features.rows())
            .map(|r| {
                let z = self.intercept
                    + features.row(r).iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>();
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            })
            .collect()
    }
}
