//! Linear soft-margin SVM trained by deterministic epoch-shuffled
//! subgradient descent (Pegasos-style `1/(lambda t)` schedule).
//!
//! Objective: `J(w, b) = 0.5 ||w||^2 + C sum_i max(0, 1 - y_i (w.x_i + b))`
//! with `y_i = +1` for the monotone class. Internally the bias rides
//! along as an augmented, lightly regularized coordinate, which keeps
//! the schedule stable; coefficients are therefore optimizer-dependent
//! while the sign/magnitude structure and training accuracy are the
//! reproducible outputs.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::RngStream;

/// Fitted separating hyperplane `w . x + b = 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub train_accuracy: f64,
    /// Objective value at the end of each epoch.
    pub objective_history: Vec<f64>,
}

impl LinearSvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.decision(row) > 0.0
    }
}

/// Hinge + L2 objective of a candidate hyperplane.
pub fn svm_objective(x: &[f64], dim: usize, labels: &[bool], w: &[f64], b: f64, c: f64) -> f64 {
    let norm2: f64 = w.iter().map(|v| v * v).sum();
    let mut hinge = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = &x[i * dim..(i + 1) * dim];
        let margin =
            (if y { 1.0 } else { -1.0 }) * (b + w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>());
        hinge += (1.0 - margin).max(0.0);
    }
    0.5 * norm2 + c * hinge
}

/// Fit the soft-margin hyperplane; non-separable data is fine.
pub fn fit_linear_svm(
    x: &[f64],
    dim: usize,
    labels: &[bool],
    c: f64,
    epochs: usize,
    seed: u64,
) -> LinearSvmModel {
    assert!(dim > 0 && c > 0.0 && epochs > 0);
    assert_eq!(x.len(), dim * labels.len(), "feature block shape mismatch");
    let m = labels.len();
    // Pegasos scaling: J/(C m) = (lambda/2)||w||^2 + mean hinge,
    // lambda = 1/(C m).
    let lambda = 1.0 / (c * m as f64);
    let radius = 1.0 / lambda.sqrt();

    // Augmented parameter vector: weights then bias.
    let mut w = vec![0.0; dim + 1];
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = RngStream::new(seed, 0);
    let mut t = 0u64;
    let mut history = Vec::with_capacity(epochs);

    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &x[i * dim..(i + 1) * dim];
            let y = if labels[i] { 1.0 } else { -1.0 };
            let margin = y * (w[dim] + w[..dim].iter().zip(row).map(|(w, x)| w * x).sum::<f64>());
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                for (wj, &xj) in w[..dim].iter_mut().zip(row) {
                    *wj += eta * y * xj;
                }
                w[dim] += eta * y;
            }
            // Projection onto the ball ||w|| <= 1/sqrt(lambda).
            let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
        }
        history.push(svm_objective(x, dim, labels, &w[..dim], w[dim], c));
    }

    let bias = w[dim];
    let weights = w[..dim].to_vec();
    let correct = labels
        .iter()
        .enumerate()
        .filter(|(i, &y)| {
            let row = &x[i * dim..(i + 1) * dim];
            let d = bias + weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
            (d > 0.0) == y
        })
        .count();
    LinearSvmModel {
        weights,
        bias,
        c,
        train_accuracy: correct as f64 / m as f64,
        objective_history: history,
    }
}
