//! LU factorization with partial pivoting, plus determinant, solve, and
//! explicit inversion built on top of it.
//!
//! Singularity is a flag, not an error: a pivot whose magnitude falls at
//! or below `pivot_tol` marks the factorization singular, `determinant`
//! then reports `0.0`, and only `invert`/`solve` refuse to proceed.

use alloc::vec;
use alloc::vec::Vec;

use super::{LinalgError, SquareMatrix};

/// Pivot magnitudes at or below this are treated as zero by default.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// Packed result of `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    /// Combined factors: unit-lower multipliers below the diagonal, U on
    /// and above it.
    pub lu: SquareMatrix,
    /// Row permutation: `perm[i]` is the original row now in position `i`.
    pub perm: Vec<usize>,
    /// Sign of the permutation, +1 or -1.
    pub perm_sign: f64,
    /// True iff some pivot magnitude was at or below the tolerance.
    pub singular: bool,
}

/// Factor `a` as `P A = L U` using partial (row) pivoting.
pub fn lu_decompose(a: &SquareMatrix, pivot_tol: f64) -> LuFactorization {
    debug_assert!(pivot_tol >= 0.0);
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut perm_sign = 1.0;
    let mut singular = false;

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_abs = lu.get(k, k).abs();
        for i in (k + 1)..n {
            let v = lu.get(i, k).abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = i;
            }
        }
        if pivot_abs <= pivot_tol {
            singular = true;
            // Zero column below the diagonal: nothing to eliminate.
            continue;
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(pivot_row, j));
                lu.set(pivot_row, j, tmp);
            }
            perm.swap(k, pivot_row);
            perm_sign = -perm_sign;
        }
        let pivot = lu.get(k, k);
        for i in (k + 1)..n {
            let m = lu.get(i, k) / pivot;
            lu.set(i, k, m);
            if m == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                let v = lu.get(i, j) - m * lu.get(k, j);
                lu.set(i, j, v);
            }
        }
    }

    LuFactorization {
        lu,
        perm,
        perm_sign,
        singular,
    }
}

/// Determinant from the factorization; `0.0` when flagged singular.
pub fn determinant(f: &LuFactorization) -> f64 {
    if f.singular {
        return 0.0;
    }
    let n = f.lu.dim();
    f.perm_sign * (0..n).map(|k| f.lu.get(k, k)).product::<f64>()
}

/// Solve `A x = b` through the factorization.
#[allow(clippy::needless_range_loop)]
pub fn solve(f: &LuFactorization, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if f.singular {
        return Err(LinalgError::SingularMatrix);
    }
    let n = f.lu.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            left: n,
            right: b.len(),
        });
    }
    // Forward: L y = P b (L has unit diagonal).
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[f.perm[i]];
        for j in 0..i {
            s -= f.lu.get(i, j) * y[j];
        }
        y[i] = s;
    }
    // Backward: U x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= f.lu.get(i, j) * x[j];
        }
        x[i] = s / f.lu.get(i, i);
    }
    Ok(x)
}

/// Explicit inverse, column by column.
pub fn invert(f: &LuFactorization) -> Result<SquareMatrix, LinalgError> {
    if f.singular {
        return Err(LinalgError::SingularMatrix);
    }
    let n = f.lu.dim();
    let mut inv = SquareMatrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = solve(f, &e)?;
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            inv.set(i, j, v);
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn identity_has_identity_permutation() {
        let f = lu_decompose(&SquareMatrix::identity(3), DEFAULT_PIVOT_TOL);
        assert_eq!(f.perm, vec![0, 1, 2]);
        assert!(!f.singular);
        assert_eq!(f.perm_sign, 1.0);
    }

    #[test]
    fn zero_diagonal_forces_swap() {
        let a = SquareMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let f = lu_decompose(&a, DEFAULT_PIVOT_TOL);
        assert_eq!(f.perm, vec![1, 0]);
        assert_eq!(f.perm_sign, -1.0);
        assert!(!f.singular);
    }

    #[test]
    fn rank_one_is_singular() {
        let a = SquareMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let f = lu_decompose(&a, DEFAULT_PIVOT_TOL);
        assert!(f.singular);
        assert_eq!(determinant(&f), 0.0);
        assert!(matches!(invert(&f), Err(LinalgError::SingularMatrix)));
    }

    #[test]
    fn determinant_examples() {
        let f = lu_decompose(&SquareMatrix::identity(7), DEFAULT_PIVOT_TOL);
        assert_eq!(determinant(&f), 1.0);

        let d = SquareMatrix::diagonal(&[1.0, 2.0]).unwrap();
        assert_eq!(determinant(&lu_decompose(&d, DEFAULT_PIVOT_TOL)), 2.0);

        // 2x2 cofactor formula: 2*2 - (-1)(-1) = 3.
        let a = SquareMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]).unwrap();
        let det = determinant(&lu_decompose(&a, DEFAULT_PIVOT_TOL));
        assert!((det - 3.0).abs() < 1e-12);
    }

    #[test]
    fn invert_examples() {
        let f = lu_decompose(&SquareMatrix::identity(5), DEFAULT_PIVOT_TOL);
        assert_eq!(invert(&f).unwrap(), SquareMatrix::identity(5));

        let d = SquareMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let inv = invert(&lu_decompose(&d, DEFAULT_PIVOT_TOL)).unwrap();
        assert_eq!(inv, SquareMatrix::diagonal(&[1.0, 0.5]).unwrap());

        // 2x2 inverse formula gives (1/3) [[2,1],[1,2]].
        let a = SquareMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]).unwrap();
        let inv = invert(&lu_decompose(&a, DEFAULT_PIVOT_TOL)).unwrap();
        for (i, j, want) in [
            (0, 0, 2.0 / 3.0),
            (0, 1, 1.0 / 3.0),
            (1, 0, 1.0 / 3.0),
            (1, 1, 2.0 / 3.0),
        ] {
            assert!((inv.get(i, j) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_and_inverse_residuals_on_random_matrices() {
        let mut rng = RngStream::new(1234, 0);
        for trial in 0..200 {
            let n = [3, 5, 7][trial % 3];
            let entries: Vec<f64> = (0..n * n).map(|_| rng.next_open_sym()).collect();
            let a = SquareMatrix::new(n, entries).unwrap();
            let f = lu_decompose(&a, DEFAULT_PIVOT_TOL);
            if f.singular {
                continue;
            }
            // P A = L U reconstruction.
            for i in 0..n {
                for j in 0..n {
                    let mut lu_ij = 0.0;
                    for k in 0..=i.min(j) {
                        let l = if k == i { 1.0 } else { f.lu.get(i, k) };
                        lu_ij += l * if k <= j { f.lu.get(k, j) } else { 0.0 };
                    }
                    // Row i of PA is row perm[i] of A.
                    let pa_ij = a.get(f.perm[i], j);
                    assert!(
                        (lu_ij - pa_ij).abs() < 1e-10,
                        "n={n} ({i},{j}): {lu_ij} vs {pa_ij}"
                    );
                }
            }
            let inv = invert(&f).unwrap();
            let mut resid = a.mul(&inv).unwrap();
            for i in 0..n {
                resid.set(i, i, resid.get(i, i) - 1.0);
            }
            assert!(resid.max_abs() < 1e-8, "residual {}", resid.max_abs());
        }
    }
}
