//! Dense row-stochastic matrices over a small finite trait alphabet.

use crate::error::{Error, Result};

/// Row sums must match 1 to this tolerance at construction time.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Square row-stochastic matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    /// Validates nonnegativity and row sums (within [`ROW_SUM_TOL`]).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Config("empty transition matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Config(format!(
                    "transition matrix row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for &p in row {
                if p.is_nan() || p < 0.0 {
                    return Err(Error::Config(format!(
                        "transition matrix row {i} has negative entry {p}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Config(format!(
                    "transition matrix row {i} sums to {sum}, expected 1 within {ROW_SUM_TOL}"
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// Builds from raw entries without the stochasticity check; used for
    /// intermediate accumulations that are validated by the caller.
    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).iter().sum()).collect()
    }

    /// `self * other`, matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Self::from_raw(n, out)
    }

    /// Left action `dist * self` of a row vector.
    pub fn apply_left(&self, dist: &[f64]) -> Vec<f64> {
        assert_eq!(dist.len(), self.dim);
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (i, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for j in 0..n {
                out[j] += w * self.data[i * n + j];
            }
        }
        out
    }

    /// Right action `self * f` on a column vector (function on the alphabet).
    pub fn apply_right(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(f).map(|(q, v)| q * v).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Stationary distribution by a direct linear solve of `pi Q = pi`,
    /// `sum pi = 1` (Gaussian elimination with partial pivoting). This is
    /// deliberately not power iteration, so it can serve as an independent
    /// oracle for n-step products.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        // Unknowns pi_0..pi_{n-1}; equations: (Q^T - I) pi = 0 for the first
        // n-1 rows, replaced last row by the normalization sum = 1.
        let mut a = vec![0.0; n * (n + 1)];
        for eq in 0..n - 1 {
            for j in 0..n {
                a[eq * (n + 1) + j] = self.entry(j, eq) - if j == eq { 1.0 } else { 0.0 };
            }
        }
        for j in 0..n {
            a[(n - 1) * (n + 1) + j] = 1.0;
        }
        a[(n - 1) * (n + 1) + n] = 1.0;

        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * (n + 1) + col]
                        .abs()
                        .partial_cmp(&a[s * (n + 1) + col].abs())
                        .unwrap()
                })
                .unwrap();
            if a[pivot * (n + 1) + col].abs() < 1e-14 {
                return Err(Error::Config(
                    "stationary solve: singular system (kernel not irreducible?)".into(),
                ));
            }
            if pivot != col {
                for j in 0..=n {
                    a.swap(col * (n + 1) + j, pivot * (n + 1) + j);
                }
            }
            let d = a[col * (n + 1) + col];
            for r in col + 1..n {
                let factor = a[r * (n + 1) + col] / d;
                if factor == 0.0 {
                    continue;
                }
                for j in col..=n {
                    a[r * (n + 1) + j] -= factor * a[col * (n + 1) + j];
                }
            }
        }
        let mut pi = vec![0.0; n];
        for row in (0..n).rev() {
            let mut rhs = a[row * (n + 1) + n];
            for j in row + 1..n {
                rhs -= a[row * (n + 1) + j] * pi[j];
            }
            pi[row] = rhs / a[row * (n + 1) + row];
        }
        Ok(pi)
    }
}

/// Total variation distance between two finite distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> StochasticMatrix {
        StochasticMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(StochasticMatrix::new(vec![vec![0.9, 0.2], vec![0.2, 0.8]]).is_err());
        assert!(StochasticMatrix::new(vec![vec![1.1, -0.1], vec![0.2, 0.8]]).is_err());
        assert!(StochasticMatrix::new(vec![vec![1.0], vec![0.2, 0.8]]).is_err());
    }

    #[test]
    fn stationary_of_the_two_state_kernel_is_two_thirds() {
        let pi = two_state().stationary().unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn stationary_is_a_fixed_point() {
        let q = StochasticMatrix::new(vec![
            vec![0.5, 0.25, 0.25],
            vec![0.1, 0.6, 0.3],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        let pi = q.stationary().unwrap();
        let next = q.apply_left(&pi);
        assert!(total_variation(&pi, &next) < 1e-14);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matmul_against_hand_product() {
        let q = two_state();
        let q2 = q.matmul(&q);
        // [[0.9,0.1],[0.2,0.8]]^2 = [[0.83,0.17],[0.34,0.66]]
        assert!((q2.entry(0, 0) - 0.83).abs() < 1e-15);
        assert!((q2.entry(0, 1) - 0.17).abs() < 1e-15);
        assert!((q2.entry(1, 0) - 0.34).abs() < 1e-15);
        assert!((q2.entry(1, 1) - 0.66).abs() < 1e-15);
    }
}
