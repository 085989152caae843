//! Minimal dense linear algebra: a row-major matrix, Cholesky factorization
//! for the SPD solves LDA needs, and Householder QR least squares for OLS.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Errors from factorizations and solves.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    /// Matrix dimensions do not match the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Actual dimension.
        got: usize,
    },
    /// Cholesky hit a non-positive pivot; the matrix is not positive definite.
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite {
        /// Index of the failing pivot.
        pivot: usize,
    },
    /// The design matrix does not have full column rank.
    #[error("rank-deficient matrix (column {column})")]
    RankDeficient {
        /// Index of the dependent column.
        column: usize,
    },
}

impl Matrix {
    /// Zero-filled matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from a flat row-major buffer. Panics if the length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must be rows * cols");
        Matrix { rows, cols, data }
    }

    /// Build from row slices; all rows must share one width.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Entry at (`i`, `j`).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Set entry at (`i`, `j`).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Flat row-major view of the data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix keeping only the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: indices.len(), cols: self.cols, data }
    }

    /// Append a row. Panics on width mismatch.
    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factor a symmetric positive definite matrix given in row-major order.
    pub fn new(a: &Matrix) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: a.cols() });
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(LinalgError::NotPositiveDefinite { pivot: i });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { dim: n, lower: l })
    }

    /// Solve `A x = b` using the stored factor.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: b.len() });
        }
        // Forward substitution L y = b.
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.lower[i * n + k] * y[k];
            }
            y[i] = sum / self.lower[i * n + i];
        }
        // Back substitution L^T x = y.
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= self.lower[k * n + i] * x[k];
            }
            x[i] = sum / self.lower[i * n + i];
        }
        Ok(x)
    }
}

/// Least-squares solution of `X beta = y` by Householder QR.
pub struct LeastSquares {
    /// Coefficient estimates.
    pub coefficients: Vec<f64>,
    /// Inverse of `X^T X`, reconstructed from the R factor; needed for
    /// coefficient standard errors.
    pub xtx_inverse: Matrix,
}

/// Solve a (tall) least-squares problem. Requires `rows >= cols` and full
/// column rank; rank deficiency is detected from vanishing R pivots.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<LeastSquares, LinalgError> {
    let n = x.rows();
    let p = x.cols();
    if y.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: y.len() });
    }
    if n < p {
        return Err(LinalgError::DimensionMismatch { expected: p, got: n });
    }

    // Householder QR, transforming y alongside; r ends up upper triangular.
    let mut r = x.clone();
    let mut qty: Vec<f64> = y.to_vec();
    let mut col_norm_max: f64 = 0.0;
    for j in 0..p {
        let mut norm = 0.0;
        for i in 0..n {
            norm += r.get(i, j) * r.get(i, j);
        }
        col_norm_max = col_norm_max.max(norm.sqrt());
    }
    let tol = col_norm_max * 1e-12;

    for k in 0..p {
        // Householder vector for column k below the diagonal.
        let mut norm = 0.0;
        for i in k..n {
            norm += r.get(i, k) * r.get(i, k);
        }
        let norm = norm.sqrt();
        if norm <= tol {
            return Err(LinalgError::RankDeficient { column: k });
        }
        let alpha = if r.get(k, k) >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - k];
        v[0] = r.get(k, k) - alpha;
        for i in k + 1..n {
            v[i - k] = r.get(i, k);
        }
        let vtv: f64 = v.iter().map(|a| a * a).sum();
        if vtv > 0.0 {
            // Apply H = I - 2 v v^T / (v^T v) to the remaining columns and to y.
            for j in k..p {
                let mut dot = 0.0;
                for i in k..n {
                    dot += v[i - k] * r.get(i, j);
                }
                let scale = 2.0 * dot / vtv;
                for i in k..n {
                    let val = r.get(i, j) - scale * v[i - k];
                    r.set(i, j, val);
                }
            }
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * qty[i];
            }
            let scale = 2.0 * dot / vtv;
            for i in k..n {
                qty[i] -= scale * v[i - k];
            }
        }
        r.set(k, k, alpha);
        for i in k + 1..n {
            r.set(i, k, 0.0);
        }
    }

    // Back substitution R beta = Q^T y (top p rows).
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut sum = qty[i];
        for j in i + 1..p {
            sum -= r.get(i, j) * beta[j];
        }
        beta[i] = sum / r.get(i, i);
    }

    // (X^T X)^{-1} = R^{-1} R^{-T}: invert R, then multiply.
    let mut rinv = Matrix::zeros(p, p);
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        for i in (0..p).rev() {
            let mut sum = e[i];
            for j in i + 1..p {
                sum -= r.get(i, j) * rinv.get(j, col);
            }
            rinv.set(i, col, sum / r.get(i, i));
        }
    }
    let mut xtx_inv = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut sum = 0.0;
            for k in 0..p {
                sum += rinv.get(i, k) * rinv.get(j, k);
            }
            xtx_inv.set(i, j, sum);
        }
    }

    Ok(LeastSquares { coefficients: beta, xtx_inverse: xtx_inv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_rows(&[&[4.0, 2.0, 0.6], &[2.0, 5.0, 1.0], &[0.6, 1.0, 3.0]]);
        let chol = Cholesky::new(&a).unwrap();
        let x = chol.solve(&[1.0, 2.0, 3.0]).unwrap();
        // Verify A x = b.
        for i in 0..3 {
            let got: f64 = (0..3).map(|j| a.get(i, j) * x[j]).sum();
            assert!((got - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(Cholesky::new(&a), Err(LinalgError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn least_squares_exact_fit() {
        // y = 2 + 3 x, noiseless: residuals must vanish.
        let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let mut x = Matrix::zeros(6, 2);
        let mut y = vec![0.0; 6];
        for (i, &v) in xs.iter().enumerate() {
            x.set(i, 0, 1.0);
            x.set(i, 1, v);
            y[i] = 2.0 + 3.0 * v;
        }
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_detects_rank_deficiency() {
        // Second column is 2x the first.
        let x = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        let y = vec![1.0, 2.0, 3.0];
        assert!(matches!(least_squares(&x, &y), Err(LinalgError::RankDeficient { .. })));
    }

    #[test]
    fn xtx_inverse_matches_direct_inverse() {
        let x = Matrix::from_rows(&[
            &[1.0, 0.5],
            &[1.0, 1.5],
            &[1.0, 2.0],
            &[1.0, 3.5],
            &[1.0, 4.0],
        ]);
        let y = vec![0.0; 5];
        let fit = least_squares(&x, &y).unwrap();
        // X^T X = [[5, 11.5], [11.5, 34.75]]; invert by the 2x2 formula.
        let (a, b, c, d) = (5.0, 11.5, 11.5, 34.75);
        let det = a * d - b * c;
        let expect = [[d / det, -b / det], [-c / det, a / det]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((fit.xtx_inverse.get(i, j) - expect[i][j]).abs() < 1e-10);
            }
        }
    }
}
