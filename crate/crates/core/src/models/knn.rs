//! Brute-force k-nearest neighbors on per-feature standardized values with
//! Euclidean distance. Distance ties break toward the lower training-row
//! index; the score is the positive fraction among the k neighbors.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::models::Standardizer;

/// Fitted KNN; stores the standardized training set.
#[derive(Debug, Clone)]
pub struct KnnModel {
    standardizer: Standardizer,
    train_x: Matrix,
    train_y: Vec<u8>,
    k: usize,
}

pub(crate) fn fit(x: &Matrix, y: &[u8], k: usize) -> KnnModel {
    let standardizer = Standardizer::fit(x);
    let train_x = standardizer.transform(x);
    // A neighbor count beyond the training size degenerates to using
    // everything.
    let k = k.min(x.rows()).max(1);
    KnnModel { standardizer, train_x, train_y: y.to_vec(), k }
}

impl KnnModel {
    pub(crate) fn width(&self) -> usize {
        self.standardizer.width()
    }

    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        let xs = self.standardizer.transform(features);
        let n_train = self.train_x.rows();
        let mut out = Vec::with_capacity(xs.rows());
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n_train);
        for r in 0..xs.rows() {
            let query = xs.row(r);
            dist.clear();
            for t in 0..n_train {
                let d2: f64 = self
                    .train_x
                    .row(t)
                    .iter()
                    .zip(query)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                dist.push((d2, t));
            }
            let k = self.k;
            dist.select_nth_unstable_by(k - 1, |a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            });
            let positives =
                dist[..k].iter().filter(|&&(_, idx)| self.train_y[idx] == 1).count();
            out.push(positives as f64 / k as f64);
        }
        out
    }
}
