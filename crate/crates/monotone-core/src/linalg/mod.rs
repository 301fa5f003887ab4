//! Dense real linear algebra: LU factorization, inversion, determinants,
//! eigenvalues, and characteristic-polynomial coefficients.
//!
//! Everything operates on [`SquareMatrix`], a dense row-major `n x n`
//! matrix of finite `f64` entries. The characteristic polynomial uses the
//! monic convention `p(lambda) = det(lambda I - A)`, so `c_0 = (-1)^n det(A)`
//! and `c_1 = (-1)^(n-1) tr(adj(A))`; every downstream feature relies on
//! that sign convention.

mod charpoly;
mod eigen;
mod lu;

pub use charpoly::{char_poly, CharPoly};
pub use eigen::{eigenvalues, Eigenvalue, Spectrum};
pub use lu::{determinant, invert, lu_decompose, solve, LuFactorization, DEFAULT_PIVOT_TOL};

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

/// Largest supported dimension for eigenvalue computations.
pub const MAX_EIGEN_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("expected {expected} entries for a {n}x{n} matrix, got {got}")]
    BadEntryCount {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("matrix is singular (pivot below tolerance)")]
    SingularMatrix,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("eigenvalue iteration failed to converge within {iterations} steps")]
    ConvergenceFailure { iterations: usize },
    #[error("dimension {n} exceeds the supported maximum {max}")]
    UnsupportedDimension { n: usize, max: usize },
}

/// Dense real square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    /// Build from row-major entries; rejects wrong lengths and NaN/Inf.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if entries.len() != n * n {
            return Err(LinalgError::BadEntryCount {
                n,
                expected: n * n,
                got: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFiniteEntry {
                row: k / n,
                col: k % n,
            });
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let n = diag.len();
        let mut m = Self::zeros(n);
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        for (i, &d) in diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(LinalgError::NonFiniteEntry { row: i, col: i });
            }
            m.set(i, i, d);
        }
        Ok(m)
    }

    /// Convenience constructor from nested rows, mainly for tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::BadEntryCount {
                    n,
                    expected: n * n,
                    got: row.len() * n,
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Sum of diagonal elements.
    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
        if self.n != rhs.n {
            return Err(LinalgError::DimensionMismatch {
                left: self.n,
                right: rhs.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += aik * rhs.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                left: self.n,
                right: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest absolute entry, useful for residual checks.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}
