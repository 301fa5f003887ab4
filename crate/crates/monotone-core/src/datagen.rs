//! Seeded sampling of `U(-1,1)` matrices, the monotonicity oracle, and
//! balanced rejection-sampled datasets.
//!
//! A matrix is monotone iff it is invertible and its inverse is entrywise
//! nonnegative. Balanced datasets are built by rejection: draw matrices,
//! label them with the oracle, and keep the first `per_class` of each
//! label.
//!
//! Reproducibility contract: attempt `i` draws its entries from
//! `RngStream::new(seed, i)`, and accepted samples are ordered by attempt
//! index. The dataset content is therefore a pure function of
//! `(n, per_class, seed)`; in particular it is invariant to how many
//! workers process the attempt space, which is what lets a parallel
//! front-end reproduce the sequential output bit for bit.

use alloc::vec::Vec;
use thiserror::Error;

use crate::linalg::{self, eigenvalues, SquareMatrix, DEFAULT_PIVOT_TOL};
use crate::rng::RngStream;

/// Inverse entries are required to be `>= -neg_tol`; the default accepts
/// exact nonnegativity only.
pub const DEFAULT_NEG_TOL: f64 = 0.0;

/// Default ceiling on rejection-sampling attempts per dataset.
pub const DEFAULT_ATTEMPT_CAP: u64 = 1_000_000_000;

/// Bumped whenever generated content could change for a fixed seed.
pub const GENERATOR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error(
        "attempt cap {cap} exhausted after {attempts} draws \
         ({monotone_found} monotone / {non_monotone_found} non-monotone found)"
    )]
    AttemptCapExceeded {
        cap: u64,
        attempts: u64,
        monotone_found: usize,
        non_monotone_found: usize,
    },
    #[error("per_class must be >= 1")]
    EmptyRequest,
    #[error("workers must be >= 1")]
    NoWorkers,
    #[error("matrix dimension must be >= 2")]
    DimensionTooSmall,
}

/// One labeled matrix; `sample_id` is the rejection-sampling attempt
/// index that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub matrix: SquareMatrix,
    pub monotone: bool,
    pub sample_id: u64,
}

/// Provenance recorded alongside every dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub seed: u64,
    pub attempts: u64,
    pub neg_tol: f64,
    pub monotone_count: usize,
    pub non_monotone_count: usize,
    pub generator_version: u32,
}

/// A set of labeled samples of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub samples: Vec<LabeledSample>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_balanced(&self) -> bool {
        self.meta.monotone_count == self.meta.non_monotone_count
    }
}

/// `n x n` matrix with entries drawn i.i.d. from the open interval
/// `(-1, 1)`, filled in row-major order.
pub fn sample_uniform_matrix(n: usize, rng: &mut RngStream) -> SquareMatrix {
    debug_assert!(n >= 2);
    let entries: Vec<f64> = (0..n * n).map(|_| rng.next_open_sym()).collect();
    SquareMatrix::new(n, entries).expect("draws are finite")
}

/// Monotonicity oracle: `A` is invertible and every entry of `A^-1` is
/// at least `-neg_tol`. Singular (per the LU pivot tolerance) means not
/// monotone.
pub fn is_monotone(a: &SquareMatrix, neg_tol: f64) -> bool {
    debug_assert!(neg_tol >= 0.0);
    let f = linalg::lu_decompose(a, DEFAULT_PIVOT_TOL);
    if f.singular {
        return false;
    }
    match linalg::invert(&f) {
        Ok(inv) => inv.entries().iter().all(|&v| v >= -neg_tol),
        Err(_) => false,
    }
}

/// Guaranteed-monotone matrix `s I - B` built from an explicit
/// nonnegative `B`, with `s = rho(B) (1 + margin)`.
pub fn m_matrix_from(b: &SquareMatrix, margin: f64) -> SquareMatrix {
    debug_assert!(margin > 0.0);
    let n = b.dim();
    // Perron root; fall back to the row-sum bound rho(B) <= max_i sum_j B_ij,
    // which still yields an M-matrix.
    let rho = eigenvalues(b)
        .map(|s| {
            s.values()
                .iter()
                .map(|e| e.modulus())
                .fold(0.0f64, f64::max)
        })
        .unwrap_or_else(|_| {
            (0..n)
                .map(|i| b.row(i).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0f64, f64::max)
        });
    let s = if rho > 0.0 {
        rho * (1.0 + margin)
    } else {
        margin
    };
    let mut a = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j {
                s - b.get(i, j)
            } else {
                -b.get(i, j)
            };
            a.set(i, j, v);
        }
    }
    a
}

/// Random M-matrix: `B` entrywise uniform on `[0, 1)`, then
/// [`m_matrix_from`].
pub fn make_m_matrix(n: usize, rng: &mut RngStream, margin: f64) -> SquareMatrix {
    debug_assert!(n >= 2 && margin > 0.0);
    let entries: Vec<f64> = (0..n * n).map(|_| rng.next_f64()).collect();
    let b = SquareMatrix::new(n, entries).expect("draws are finite");
    m_matrix_from(&b, margin)
}

/// One attempt of the logical attempt sequence behind
/// [`generate_balanced`]: draw the matrix for `index` and label it.
/// Exposed so parallel front-ends can partition the attempt space while
/// reproducing the sequential dataset exactly.
pub fn attempt(n: usize, seed: u64, index: u64, neg_tol: f64) -> (SquareMatrix, bool) {
    let mut rng = RngStream::new(seed, index as u32);
    let m = sample_uniform_matrix(n, &mut rng);
    let mono = is_monotone(&m, neg_tol);
    (m, mono)
}

/// Rejection-sample a balanced dataset: `per_class` monotone and
/// `per_class` non-monotone matrices, ordered by attempt index.
///
/// `workers` is validated but does not influence content; see the module
/// docs. Attempt indices are bounded by `u32::MAX` because each attempt
/// owns one RNG stream id.
pub fn generate_balanced(
    n: usize,
    per_class: usize,
    seed: u64,
    workers: usize,
    attempt_cap: u64,
) -> Result<Dataset, DatagenError> {
    if per_class == 0 {
        return Err(DatagenError::EmptyRequest);
    }
    if workers == 0 {
        return Err(DatagenError::NoWorkers);
    }
    if n < 2 {
        return Err(DatagenError::DimensionTooSmall);
    }
    let cap = attempt_cap.min(u64::from(u32::MAX));
    let neg_tol = DEFAULT_NEG_TOL;

    let mut samples: Vec<LabeledSample> = Vec::with_capacity(2 * per_class);
    let mut mono = 0usize;
    let mut non = 0usize;
    let mut attempts = 0u64;
    for i in 0..cap {
        let (matrix, monotone) = attempt(n, seed, i, neg_tol);
        attempts = i + 1;
        let want = if monotone {
            mono < per_class
        } else {
            non < per_class
        };
        if want {
            if monotone {
                mono += 1;
            } else {
                non += 1;
            }
            samples.push(LabeledSample {
                matrix,
                monotone,
                sample_id: i,
            });
        }
        if mono == per_class && non == per_class {
            return Ok(Dataset {
                n,
                samples,
                meta: DatasetMeta {
                    seed,
                    attempts,
                    neg_tol,
                    monotone_count: mono,
                    non_monotone_count: non,
                    generator_version: GENERATOR_VERSION,
                },
            });
        }
    }
    Err(DatagenError::AttemptCapExceeded {
        cap,
        attempts,
        monotone_found: mono,
        non_monotone_found: non,
    })
}
