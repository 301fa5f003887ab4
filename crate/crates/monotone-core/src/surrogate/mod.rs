//! Interpretable models distilled from data or from a trained network:
//! CART decision trees, depth-1 threshold stumps, linear soft-margin
//! SVMs, and a published closed-form score in `|c0|`.
//!
//! Trees fitted to a classifier's *predicted* labels act as pedagogical
//! surrogates of its decision boundary; the same fitting code works on
//! ground-truth labels. Monotone-majority leaves of a two-feature tree
//! translate into axis-aligned rectangles in the `(|c0|, |c1|)` plane.

mod formula;
mod svm;
mod tree;

pub use formula::{
    symbolic_formula, FormulaVerdict, FORMULA_INTERCEPT, FORMULA_NUMERATOR, FORMULA_POLE,
};
pub use svm::{fit_linear_svm, svm_objective, LinearSvmModel};
pub use tree::{
    extract_monotone_bands, fit_stump, fit_tree, DecisionTree, MonotoneBand, Stump, TreeNode,
};

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurrogateError {
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("tree splits on feature {feature} outside the designated pair")]
    NonPlanarTree { feature: usize },
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
}
