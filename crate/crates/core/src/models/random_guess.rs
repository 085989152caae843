//! Prevalence-matched random guessing: a fixed share of cases gets a score
//! drawn uniformly from (0.51, 0.99), the rest from (0.01, 0.49), so the
//! 0.5 cutoff reproduces the target prevalence exactly while carrying no
//! information about the features.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::linalg::Matrix;
use crate::seed::Seed;

/// The random-guess baseline; remembers only the training prevalence and a
/// seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomGuessModel {
    width: usize,
    train_prevalence: f64,
    seed: Seed,
}

/// Scores for `n` cases at the given prevalence: exactly
/// `round(prevalence * n)` cases (chosen uniformly without replacement)
/// score in (0.51, 0.99), the others in (0.01, 0.49). Deterministic under
/// the seed.
pub fn random_guess_scores(prevalence: f64, n: usize, seed: Seed) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&prevalence), "prevalence {prevalence} outside [0, 1]");
    let prevalence = prevalence.clamp(0.0, 1.0);
    let mut rng = seed.rng();
    let n_high = ((prevalence * n as f64).round() as usize).min(n);
    let mut high = alloc::vec![false; n];
    for i in sample_indices(&mut rng, n, n_high) {
        high[i] = true;
    }
    high.into_iter()
        .map(|h| {
            if h {
                rng.random_range(0.51..0.99)
            } else {
                rng.random_range(0.01..0.49)
            }
        })
        .collect()
}

impl RandomGuessModel {
    pub(crate) fn new(width: usize, train_prevalence: f64, seed: Seed) -> RandomGuessModel {
        RandomGuessModel { width, train_prevalence, seed }
    }

    pub(crate) fn width(&self) -> usize {
        self.width
    }

    /// Scores depend only on the row count, the stored prevalence, and the
    /// stored seed — never on feature values.
    pub(crate) fn predict(&self, features: &Matrix) -> Vec<f64> {
        random_guess_scores(self.train_prevalence, features.rows(), self.seed)
    }
}
