//! Numerical core for classifying real square matrices as monotone
//! (inverse entrywise nonnegative) or not, and for distilling the learned
//! decision into interpretable criteria.
//!
//! The pipeline this crate supports:
//!
//! 1. [`datagen`]: seeded rejection sampling of `U(-1,1)` matrices into
//!    balanced labeled datasets, with an exact monotonicity oracle.
//! 2. [`features`]: spectral/algebraic feature vectors (spectral radius,
//!    Fiedler value, trace, eigenvalue parts, `|c_k|` coefficients) plus
//!    the ratio `|c0/c1| = 1/|tr(A^-1)|`.
//! 3. [`nn`]: feed-forward binary classifiers trained from scratch
//!    (Adam, dropout, L2, early stopping) with input-gradient support.
//! 4. [`xai`]: Integrated Gradients attribution and feature rankings.
//! 5. [`surrogate`]: CART trees, depth-1 stumps, linear SVMs, and a
//!    published closed-form score, all over the extracted features.
//! 6. [`evt`]: peaks-over-threshold generalized Pareto analysis of the
//!    monotone-class ratio tail: MLE fits, diagnostics, endpoint and
//!    exceedance estimates, bootstrap confidence intervals.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature instead of `std` for float math in freestanding builds. All
//! randomness flows through [`rng::RngStream`], so every operation is
//! reproducible from a `(seed, stream)` pair.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod datagen;
pub mod evt;
pub mod features;
pub mod linalg;
pub mod nn;
pub mod rng;
pub mod surrogate;
pub mod xai;

pub use linalg::SquareMatrix;
pub use rng::RngStream;
