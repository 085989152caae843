//! Gradient boosting with depth-1 stumps on logistic loss: the prior
//! log-odds plus shrunken Newton-step stump updates, scored through a
//! sigmoid. Feature orders are presorted once so each round costs O(d n).

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::linalg::Matrix;

#[derive(Debug, Clone)]
struct Stump {
    feature: usize,
    threshold: f64,
    left_value: f64,
    right_value: f64,
}

/// Fitted gradient-boosted stump ensemble.
#[derive(Debug, Clone)]
pub struct GbmModel {
    width: usize,
    base_score: f64,
    learning_rate: f64,
    stumps: Vec<Stump>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn fit(
    x: &Matrix,
    y: &[u8],
    rounds: usize,
    learning_rate: f64,
    min_leaf: usize,
) -> GbmModel {
    let n = x.rows();
    let d = x.cols();
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    let base_score = (n_pos as f64 / (n - n_pos) as f64).ln();

    // Row order per feature, sorted once by value.
    let orders: Vec<Vec<usize>> = (0..d)
        .map(|f| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_unstable_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            idx
        })
        .collect();

    let mut margin = alloc::vec![base_score; n];
    let mut residual = alloc::vec![0.0; n];
    let mut hessian = alloc::vec![0.0; n];
    let mut stumps = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        for i in 0..n {
            let p = sigmoid(margin[i]);
            residual[i] = y[i] as f64 - p;
            hessian[i] = p * (1.0 - p);
        }
        let Some(stump) = best_stump(x, &orders, &residual, &hessian, min_leaf) else {
            break; // no admissible split left
        };
        for i in 0..n {
            let value = if x.get(i, stump.feature) <= stump.threshold {
                stump.left_value
            } else {
                stump.right_value
            };
            margin[i] += learning_rate * value;
        }
        stumps.push(stump);
    }
    GbmModel { width: d, base_score, learning_rate, stumps }
}

/// Squared-error stump on the gradient residuals, with Newton leaf values
/// sum(residual) / sum(hessian). Ties keep the first feature and lowest
/// threshold. Returns None when no split satisfies `min_leaf` on both sides.
fn best_stump(
    x: &Matrix,
    orders: &[Vec<usize>],
    residual: &[f64],
    hessian: &[f64],
    min_leaf: usize,
) -> Option<Stump> {
    let n = residual.len();
    let total_r: f64 = residual.iter().sum();
    let total_h: f64 = hessian.iter().sum();
    let mut best: Option<(f64, Stump)> = None;

    for (feature, order) in orders.iter().enumerate() {
        let mut left_r = 0.0;
        let mut left_h = 0.0;
        for (pos, &row) in order[..n - 1].iter().enumerate() {
            left_r += residual[row];
            left_h += hessian[row];
            let here = x.get(row, feature);
            let next = x.get(order[pos + 1], feature);
            if here == next {
                continue;
            }
            let left_n = pos + 1;
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            // Maximizing sum_L^2/n_L + sum_R^2/n_R is minimizing stump SSE.
            let right_r = total_r - left_r;
            let gain =
                left_r * left_r / left_n as f64 + right_r * right_r / right_n as f64;
            if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                let right_h = total_h - left_h;
                let newton = |r: f64, h: f64| if h > 1e-12 { r / h } else { 0.0 };
                best = Some((
                    gain,
                    Stump {
                        feature,
                        threshold: here,
                        left_value: newton(left_r, left_h),
                        right_value: newton(right_r, right_h),
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s)
}

impl GbmModel {
    pub(crate) fn width(&self) -> usize {
        self.width
    }

    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        (0..features.rows())
            .map(|r| {
                let row = features.row(r);
                let mut margin = self.base_score;
                for s in &self.stumps {
                    margin += self.learning_rate
                        * if row[s.feature] <= s.threshold { s.left_value } else { s.right_value };
                }
                sigmoid(margin)
            })
            .collect()
    }
}
