//! Random forest: bootstrap-bagged CART trees with per-node sqrt(d) feature
//! subsampling; the score is the mean of the trees' leaf probabilities.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use rand::Rng;

use crate::linalg::Matrix;
use crate::models::tree::{build, TreeModel, TreeParams};
use crate::seed::Seed;

const STREAM_TREE: u64 = 0x21;

/// Fitted random forest.
#[derive(Debug, Clone)]
pub struct ForestModel {
    width: usize,
    trees: Vec<TreeModel>,
}

pub(crate) fn fit(
    x: &Matrix,
    y: &[u8],
    n_trees: usize,
    max_depth: usize,
    min_leaf: usize,
    seed: Seed,
) -> ForestModel {
    let n = x.rows();
    let subsample = ((x.cols() as f64).sqrt().floor() as usize).max(1);
    let params = TreeParams { max_depth, min_leaf, feature_subsample: Some(subsample) };
    let trees = (0..n_trees)
        .map(|t| {
            let mut rng = seed.derive(STREAM_TREE).derive(t as u64).rng();
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            build(x, y, &rows, &params, &mut rng)
        })
        .collect();
    ForestModel { width: x.cols(), trees }
}

impl ForestModel {
    pub(crate) fn width(&self) -> usize {
        self.width
    }

    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        let inv = 1.0 / self.trees.len() as f64;
        (0..features.rows())
            .map(|r| {
                let row = features.row(r);
                self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() * inv
            })
            .collect()
    }
}
