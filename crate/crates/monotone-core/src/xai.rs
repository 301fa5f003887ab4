//! Integrated Gradients attribution and feature-importance ranking.
//!
//! For a model `F`, baseline `x'` and input `x`, the attribution of
//! feature `i` is
//!
//! ```text
//! IG_i(x, x') = (x_i - x'_i) * Int_0^1 dF/dx_i (x' + alpha (x - x')) d alpha
//! ```
//!
//! approximated with an `m`-step trapezoid rule by default (midpoint
//! available for comparison). The method satisfies Completeness:
//! `sum_i IG_i = F(x) - F(x')` up to quadrature error, and every report
//! records its worst completeness residual so a violation is visible
//! rather than silent.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

use crate::nn::DifferentiableFn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum XaiError {
    #[error("baseline/input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integration needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("attribution over an empty table")]
    EmptyTable,
}

/// Quadrature rule for the path integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Quadrature {
    #[default]
    Trapezoid,
    Midpoint,
}

/// Baseline selection for attribution runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    /// Per-feature mean over the attributed table.
    DatasetMean,
    /// The zero vector.
    Zero,
    Custom(Vec<f64>),
}

/// Integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IgConfig {
    pub steps: usize,
    pub baseline: Baseline,
    pub quadrature: Quadrature,
    /// Completeness residuals above this are counted as violations.
    pub completeness_tol: f64,
}

impl Default for IgConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            baseline: Baseline::DatasetMean,
            quadrature: Quadrature::Trapezoid,
            completeness_tol: 1e-3,
        }
    }
}

/// Integrated Gradients of one input against an explicit baseline.
pub fn integrated_gradients<F: DifferentiableFn>(
    model: &F,
    x: &[f64],
    baseline: &[f64],
    cfg: &IgConfig,
) -> Result<Vec<f64>, XaiError> {
    let dim = model.input_dim();
    if x.len() != dim {
        return Err(XaiError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if baseline.len() != dim {
        return Err(XaiError::DimensionMismatch {
            expected: dim,
            got: baseline.len(),
        });
    }
    if cfg.steps < 2 {
        return Err(XaiError::TooFewSteps(cfg.steps));
    }
    let m = cfg.steps;
    let mut acc = vec![0.0; dim];
    let mut point = vec![0.0; dim];
    let mut add_gradient_at = |alpha: f64, weight: f64, acc: &mut [f64]| {
        for (p, (&xi, &bi)) in point.iter_mut().zip(x.iter().zip(baseline)) {
            *p = bi + alpha * (xi - bi);
        }
        let g = model.gradient(&point);
        for (a, gi) in acc.iter_mut().zip(g) {
            *a += weight * gi;
        }
    };
    match cfg.quadrature {
        Quadrature::Trapezoid => {
            let w = 1.0 / m as f64;
            add_gradient_at(0.0, 0.5 * w, &mut acc);
            for k in 1..m {
                add_gradient_at(k as f64 / m as f64, w, &mut acc);
            }
            add_gradient_at(1.0, 0.5 * w, &mut acc);
        }
        Quadrature::Midpoint => {
            let w = 1.0 / m as f64;
            for k in 0..m {
                add_gradient_at((k as f64 + 0.5) / m as f64, w, &mut acc);
            }
        }
    }
    for (a, (&xi, &bi)) in acc.iter_mut().zip(x.iter().zip(baseline)) {
        *a *= xi - bi;
    }
    Ok(acc)
}

/// Attribution of a whole table: per-sample IG, per-feature mean |IG|,
/// and the descending salience ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionReport {
    /// Flat row-major per-sample attributions, one row per table row.
    pub per_sample: Vec<f64>,
    pub n_rows: usize,
    pub feature_names: Vec<String>,
    pub mean_abs: Vec<f64>,
    /// Feature indices sorted by descending mean |IG|.
    pub ranking: Vec<usize>,
    pub completeness_residuals: Vec<f64>,
    pub completeness_tol: f64,
    /// Baseline actually used, plus a content hash for report sidecars.
    pub baseline: Vec<f64>,
    pub baseline_hash: u64,
}

impl AttributionReport {
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.feature_names.len();
        &self.per_sample[i * w..(i + 1) * w]
    }

    pub fn max_residual(&self) -> f64 {
        self.completeness_residuals
            .iter()
            .fold(0.0f64, |m, &r| m.max(r))
    }

    pub fn completeness_violations(&self) -> usize {
        self.completeness_residuals
            .iter()
            .filter(|&&r| r > self.completeness_tol)
            .count()
    }

    /// Ranked `(name, mean_abs)` pairs, strongest first.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        self.ranking
            .iter()
            .map(|&i| (self.feature_names[i].as_str(), self.mean_abs[i]))
            .collect()
    }
}

/// FNV-1a over the f64 bit patterns; identifies a baseline vector.
pub fn baseline_hash(v: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for x in v {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    h
}

/// Attribute every row of a flat feature block.
pub fn attribute_dataset<F: DifferentiableFn>(
    model: &F,
    x: &[f64],
    feature_names: &[String],
    cfg: &IgConfig,
) -> Result<AttributionReport, XaiError> {
    let dim = model.input_dim();
    if feature_names.len() != dim {
        return Err(XaiError::DimensionMismatch {
            expected: dim,
            got: feature_names.len(),
        });
    }
    if x.is_empty() || !x.len().is_multiple_of(dim) {
        return Err(XaiError::EmptyTable);
    }
    let n_rows = x.len() / dim;

    let baseline: Vec<f64> = match &cfg.baseline {
        Baseline::Zero => vec![0.0; dim],
        Baseline::Custom(b) => {
            if b.len() != dim {
                return Err(XaiError::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            b.clone()
        }
        Baseline::DatasetMean => {
            let mut mean = vec![0.0; dim];
            for row in x.chunks(dim) {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n_rows as f64);
            mean
        }
    };

    let f_baseline = model.value(&baseline);
    let mut per_sample = Vec::with_capacity(x.len());
    let mut residuals = Vec::with_capacity(n_rows);
    let mut mean_abs = vec![0.0; dim];
    for row in x.chunks(dim) {
        let ig = integrated_gradients(model, row, &baseline, cfg)?;
        let total: f64 = ig.iter().sum();
        let delta = model.value(row) - f_baseline;
        residuals.push((total - delta).abs());
        for (m, v) in mean_abs.iter_mut().zip(&ig) {
            *m += v.abs();
        }
        per_sample.extend(ig);
    }
    mean_abs.iter_mut().for_each(|m| *m /= n_rows as f64);

    let mut ranking: Vec<usize> = (0..dim).collect();
    ranking.sort_by(|&a, &b| {
        mean_abs[b]
            .partial_cmp(&mean_abs[a])
            .expect("finite attributions")
            .then(a.cmp(&b))
    });

    Ok(AttributionReport {
        per_sample,
        n_rows,
        feature_names: feature_names.to_vec(),
        mean_abs,
        ranking,
        completeness_residuals: residuals,
        completeness_tol: cfg.completeness_tol,
        baseline_hash: baseline_hash(&baseline),
        baseline,
    })
}
