//! Characteristic polynomial via the Faddeev-LeVerrier recurrence.
//!
//! Computes the coefficients of the monic polynomial
//! `p(lambda) = det(lambda I - A) = lambda^n + c_{n-1} lambda^{n-1} + ... + c_0`
//! together with `tr(adj(A))`, which the recurrence yields for free. The
//! recurrence is exact in exact arithmetic and avoids pairing complex
//! roots, at an O(n^4) cost that is irrelevant for the supported n <= 64.

use alloc::vec;
use alloc::vec::Vec;

use super::SquareMatrix;

/// Coefficients of `det(lambda I - A)` in the monic convention, plus the
/// trace of the adjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    /// `coeffs[k] = c_k` for `k = 0..n-1`; the leading coefficient is 1.
    pub coeffs: Vec<f64>,
    /// `tr(adj(A))`; equals `(-1)^(n-1) c_1` and `det(A) tr(A^-1)` for
    /// invertible `A`.
    pub adj_trace: f64,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_k`, extended with the monic leading coefficient `c_n = 1`.
    pub fn coeff(&self, k: usize) -> f64 {
        if k == self.coeffs.len() {
            1.0
        } else {
            self.coeffs[k]
        }
    }

    pub fn c0(&self) -> f64 {
        self.coeffs[0]
    }

    /// `c_1`; for `n = 1` this is the monic leading coefficient.
    pub fn c1(&self) -> f64 {
        self.coeff(1)
    }
}

/// `tr(A B)` without forming the product.
fn trace_of_product(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
    let n = a.dim();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += a.get(i, j) * b.get(j, i);
        }
    }
    t
}

/// Faddeev-LeVerrier: all characteristic coefficients and `tr(adj(A))`.
pub fn char_poly(a: &SquareMatrix) -> CharPoly {
    let n = a.dim();
    // p(lambda) = lambda^n + fl[1] lambda^{n-1} + ... + fl[n], fl[0] = 1.
    let mut fl = vec![0.0; n + 1];
    fl[0] = 1.0;
    let mut m = SquareMatrix::zeros(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + fl[k-1] I
        let mut mk = a.mul(&m).expect("same dimension");
        for i in 0..n {
            mk.set(i, i, mk.get(i, i) + fl[k - 1]);
        }
        fl[k] = -trace_of_product(a, &mk) / k as f64;
        m = mk;
    }
    // adj(A) = (-1)^(n-1) M_n.
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let adj_trace = sign * m.trace();
    let coeffs = (0..n).map(|k| fl[n - k]).collect();
    CharPoly { coeffs, adj_trace }
}
