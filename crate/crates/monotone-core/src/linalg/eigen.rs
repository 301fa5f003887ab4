//! Eigenvalues of a general real square matrix.
//!
//! Householder reduction to upper Hessenberg form followed by the Francis
//! double-shift QR iteration (the classic EISPACK `hqr` scheme, eigenvalues
//! only). Complex eigenvalues of the real input come out in exact
//! conjugate pairs because each 2x2 block is resolved analytically.
//!
//! The iteration is capped at `100 * n` QR sweeps in total; hitting the
//! cap signals pathological input and is reported as
//! [`LinalgError::ConvergenceFailure`].

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{LinalgError, SquareMatrix, MAX_EIGEN_DIM};

/// One eigenvalue of a real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        // hypot is overkill here; the inputs are O(1).
        (self.re * self.re + self.im * self.im).sqrt()
    }
}

/// The full eigenvalue set of a matrix, in deflation order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<Eigenvalue>,
}

impl Spectrum {
    pub fn values(&self) -> &[Eigenvalue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Product of moduli, i.e. `|det(A)|` by Vieta.
    pub fn modulus_product(&self) -> f64 {
        self.values.iter().map(Eigenvalue::modulus).product()
    }
}

/// All `n` eigenvalues of `a`. Supported for `n <= 64`.
pub fn eigenvalues(a: &SquareMatrix) -> Result<Spectrum, LinalgError> {
    let n = a.dim();
    if n > MAX_EIGEN_DIM {
        return Err(LinalgError::UnsupportedDimension {
            n,
            max: MAX_EIGEN_DIM,
        });
    }
    if n == 1 {
        return Ok(Spectrum {
            values: vec![Eigenvalue {
                re: a.get(0, 0),
                im: 0.0,
            }],
        });
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    francis_qr(&mut h).map(|values| Spectrum { values })
}

/// In-place Householder reduction to upper Hessenberg form.
#[allow(clippy::needless_range_loop)]
fn hessenberg(a: &mut SquareMatrix) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let mut xnorm2 = 0.0;
        for i in (k + 1)..n {
            let x = a.get(i, k);
            xnorm2 += x * x;
        }
        if xnorm2 == 0.0 {
            continue;
        }
        let x0 = a.get(k + 1, k);
        let alpha = if x0 >= 0.0 {
            -xnorm2.sqrt()
        } else {
            xnorm2.sqrt()
        };
        v[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            v[i] = a.get(i, k);
        }
        // ||v||^2 = 2 (||x||^2 - alpha x0) since alpha^2 = ||x||^2.
        let vnorm2 = 2.0 * (xnorm2 - alpha * x0);
        if vnorm2 <= 0.0 {
            continue;
        }
        // Left: A <- (I - 2 v v^T / ||v||^2) A, rows k+1.. only.
        for j in k..n {
            let mut s = 0.0;
            for i in (k + 1)..n {
                s += v[i] * a.get(i, j);
            }
            let f = 2.0 * s / vnorm2;
            if f == 0.0 {
                continue;
            }
            for i in (k + 1)..n {
                a.set(i, j, a.get(i, j) - f * v[i]);
            }
        }
        // Right: A <- A (I - 2 v v^T / ||v||^2), columns k+1.. only.
        for i in 0..n {
            let mut s = 0.0;
            for j in (k + 1)..n {
                s += a.get(i, j) * v[j];
            }
            let f = 2.0 * s / vnorm2;
            if f == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                a.set(i, j, a.get(i, j) - f * v[j]);
            }
        }
        a.set(k + 1, k, alpha);
        for i in (k + 2)..n {
            a.set(i, k, 0.0);
        }
    }
}

/// C-style SIGN(a, b): |a| carrying the (nonnegative-biased) sign of b.
#[inline]
fn sign_like(a: f64, b: f64) -> f64 {
    if b < 0.0 {
        -a.abs()
    } else {
        a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; returns the
/// eigenvalues in deflation order.
fn francis_qr(a: &mut SquareMatrix) -> Result<Vec<Eigenvalue>, LinalgError> {
    let n = a.dim();
    let eps = f64::EPSILON;
    let cap = 100 * n;
    let mut total_sweeps = 0usize;

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a.get(i, j).abs();
        }
    }

    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut hi = n - 1;
    let mut t = 0.0;

    'outer: loop {
        let mut its = 0usize;
        let (mut x, mut y, mut w);
        loop {
            // Look for a negligible subdiagonal element.
            let mut l = hi;
            while l >= 1 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() <= eps * s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }

            x = a.get(hi, hi);
            if l == hi {
                // One real root deflates.
                wr[hi] = x + t;
                wi[hi] = 0.0;
                if hi == 0 {
                    break 'outer;
                }
                hi -= 1;
                break;
            }

            y = a.get(hi - 1, hi - 1);
            w = a.get(hi, hi - 1) * a.get(hi - 1, hi);
            if l + 1 == hi {
                // 2x2 block: solve the quadratic analytically.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign_like(z, p);
                    wr[hi - 1] = x + z;
                    wr[hi] = if z != 0.0 { x - w / z } else { x + z };
                    wi[hi - 1] = 0.0;
                    wi[hi] = 0.0;
                } else {
                    wr[hi - 1] = x + p;
                    wr[hi] = x + p;
                    wi[hi] = z;
                    wi[hi - 1] = -z;
                }
                if hi == 1 {
                    break 'outer;
                }
                hi -= 2;
                break;
            }

            // No deflation yet: one double QR sweep.
            total_sweeps += 1;
            if total_sweeps > cap {
                return Err(LinalgError::ConvergenceFailure {
                    iterations: total_sweeps,
                });
            }
            if its == 10 || its == 20 {
                // Exceptional shift to break symmetric stalls.
                t += x;
                for i in 0..=hi {
                    a.set(i, i, a.get(i, i) - x);
                }
                let s = a.get(hi, hi - 1).abs() + a.get(hi - 1, hi - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Find two consecutive small subdiagonals starting the bulge;
            // (p, q, r) leave holding the scaled first shift column.
            let (m, mut p, mut q, mut r) = {
                let mut m = hi - 2;
                loop {
                    let z = a.get(m, m);
                    let rr = x - z;
                    let ss = y - z;
                    let mut p = (rr * ss - w) / a.get(m + 1, m) + a.get(m, m + 1);
                    let mut q = a.get(m + 1, m + 1) - z - rr - ss;
                    let mut r = a.get(m + 2, m + 1);
                    let s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == l {
                        break (m, p, q, r);
                    }
                    let u = a.get(m, m - 1).abs() * (q.abs() + r.abs());
                    let v =
                        p.abs() * (a.get(m - 1, m - 1).abs() + z.abs() + a.get(m + 1, m + 1).abs());
                    if u <= eps * v {
                        break (m, p, q, r);
                    }
                    m -= 1;
                }
            };
            for i in (m + 2)..=hi {
                a.set(i, i - 2, 0.0);
                if i != m + 2 {
                    a.set(i, i - 3, 0.0);
                }
            }

            // Bulge chase: double QR step on rows l..=hi, columns m..=hi.
            for k in m..hi {
                if k != m {
                    p = a.get(k, k - 1);
                    q = a.get(k + 1, k - 1);
                    r = if k != hi - 1 {
                        a.get(k + 2, k - 1)
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_like((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a.set(k, k - 1, -a.get(k, k - 1));
                    }
                } else {
                    a.set(k, k - 1, -s * x);
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=hi {
                    let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                    if k != hi - 1 {
                        pp += r * a.get(k + 2, j);
                        a.set(k + 2, j, a.get(k + 2, j) - pp * z);
                    }
                    a.set(k + 1, j, a.get(k + 1, j) - pp * y);
                    a.set(k, j, a.get(k, j) - pp * x);
                }
                let mmin = hi.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * a.get(i, k) + y * a.get(i, k + 1);
                    if k != hi - 1 {
                        pp += z * a.get(i, k + 2);
                        a.set(i, k + 2, a.get(i, k + 2) - pp * r);
                    }
                    a.set(i, k + 1, a.get(i, k + 1) - pp * q);
                    a.set(i, k, a.get(i, k) - pp);
                }
            }
        }
    }

    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Eigenvalue { re, im })
        .collect())
}
