//! CART decision trees: Gini impurity, midsplit-free numeric thresholds
//! (splits sit on data values, predicate `value <= threshold` goes left),
//! depth limit, minimum leaf size, and Laplace-smoothed leaf probabilities.
//!
//! The builder optionally samples a feature subset per node, which is how
//! the random forest gets its decorrelation; a plain tree considers every
//! feature and draws no randomness at all.

use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { prob: f64 },
}

/// Fitted decision tree.
#[derive(Debug, Clone)]
pub struct TreeModel {
    width: usize,
    nodes: Vec<Node>,
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// When set, each node considers only this many uniformly sampled
    /// features.
    pub feature_subsample: Option<usize>,
}

pub(crate) fn fit(x: &Matrix, y: &[u8], max_depth: usize, min_leaf: usize) -> TreeModel {
    // No feature subsampling: the RNG is never consulted.
    let mut rng = crate::seed::Seed(0).rng();
    let rows: Vec<usize> = (0..x.rows()).collect();
    build(x, y, &rows, &TreeParams { max_depth, min_leaf, feature_subsample: None }, &mut rng)
}

/// Grow a tree over the given rows (duplicates allowed, as in bootstrap
/// samples).
pub(crate) fn build(
    x: &Matrix,
    y: &[u8],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> TreeModel {
    let mut nodes = Vec::new();
    grow(x, y, rows, params, rng, 0, &mut nodes);
    TreeModel { width: x.cols(), nodes }
}

fn leaf(nodes: &mut Vec<Node>, rows: &[usize], y: &[u8]) -> usize {
    let positives = rows.iter().filter(|&&r| y[r] == 1).count();
    // Laplace add-one smoothing keeps leaf probabilities off 0 and 1.
    let prob = (positives + 1) as f64 / (rows.len() + 2) as f64;
    nodes.push(Node::Leaf { prob });
    nodes.len() - 1
}

fn grow(
    x: &Matrix,
    y: &[u8],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = rows.len();
    let positives = rows.iter().filter(|&&r| y[r] == 1).count();
    let pure = positives == 0 || positives == n;
    if depth >= params.max_depth || pure || n < 2 * params.min_leaf {
        return leaf(nodes, rows, y);
    }

    let candidates: Vec<usize> = match params.feature_subsample {
        Some(m) if m < x.cols() => {
            let mut picked: Vec<usize> = sample_indices(rng, x.cols(), m).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..x.cols()).collect(),
    };

    let best = best_split(x, y, rows, &candidates, params.min_leaf);
    let Some((feature, threshold)) = best else {
        return leaf(nodes, rows, y);
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| x.get(r, feature) <= threshold);

    // Reserve this node's slot before recursing so children land after it.
    let slot = nodes.len();
    nodes.push(Node::Leaf { prob: 0.0 });
    let left = grow(x, y, &left_rows, params, rng, depth + 1, nodes);
    let right = grow(x, y, &right_rows, params, rng, depth + 1, nodes);
    nodes[slot] = Node::Split { feature, threshold, left, right };
    slot
}

/// Lowest weighted-Gini split over the candidate features, or None when no
/// split satisfies the leaf-size constraint. Ties keep the first feature in
/// candidate order and the lowest threshold.
fn best_split(
    x: &Matrix,
    y: &[u8],
    rows: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let total_pos = rows.iter().filter(|&&r| y[r] == 1).count() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut values: Vec<(f64, u8)> = Vec::with_capacity(n);
    for &feature in candidates {
        values.clear();
        values.extend(rows.iter().map(|&r| (x.get(r, feature), y[r])));
        values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_n = 0.0;
        let mut left_pos = 0.0;
        for i in 0..n - 1 {
            left_n += 1.0;
            left_pos += values[i].1 as f64;
            if values[i].0 == values[i + 1].0 {
                continue; // can only split between distinct values
            }
            let right_n = n as f64 - left_n;
            if (left_n as usize) < min_leaf || (right_n as usize) < min_leaf {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let gini_left = {
                let p = left_pos / left_n;
                2.0 * p * (1.0 - p)
            };
            let gini_right = {
                let p = right_pos / right_n;
                2.0 * p * (1.0 - p)
            };
            let weighted = left_n * gini_left + right_n * gini_right;
            if best.is_none_or(|(score, _, _)| weighted < score) {
                best = Some((weighted, feature, values[i].0));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

impl TreeModel {
    pub(crate) fn width(&self) -> usize {
        self.width
    }

    /// Probability at the leaf a single row falls into.
    pub(crate) fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { prob } => return *prob,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        (0..features.rows()).map(|r| self.predict_row(features.row(r))).collect()
    }
}
