//! Feed-forward binary classifiers trained from scratch.
//!
//! Architecture: a stack of ReLU hidden layers given by
//! `MlpSpec::hidden_widths`, a fixed head `Dense(32) -> dropout`, and a
//! single sigmoid output neuron. Inverted dropout follows every hidden
//! activation during training (the head uses the last body rate);
//! inference is deterministic.
//!
//! Training minimizes binary cross-entropy plus `l2_lambda * sum(W^2)`
//! with Adam, a stratified validation split, and early stopping that
//! restores the best-validation-loss parameters. The loop is
//! single-threaded so a `(data, config, seed)` triple reproduces the
//! exact same parameters.

mod metrics;
mod train;

pub use metrics::{confusion_from_probs, metrics, round_to, ConfusionCounts, Metrics};
pub use train::{
    evaluate, stratified_split, train, DataView, EpochStats, TrainConfig, TrainHistory,
};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::RngStream;

/// Width of the fixed dense head before the sigmoid output.
pub const HEAD_WIDTH: usize = 32;

/// RNG stream ids used by the nn module for a given training seed.
pub(crate) const STREAM_INIT: u32 = 0;
pub(crate) const STREAM_SPLIT: u32 = 1;
pub(crate) const STREAM_SHUFFLE: u32 = 2;
pub(crate) const STREAM_DROPOUT: u32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training split contains a single class")]
    DegenerateData,
    #[error("non-finite parameters after epoch {epoch}")]
    NonFiniteParameters { epoch: usize },
}

/// Architecture and regularization of one classifier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpSpec {
    pub input_dim: usize,
    /// Body widths; the fixed `Dense(32)` head is appended implicitly.
    pub hidden_widths: Vec<usize>,
    /// Per-body-layer dropout rates in `[0, 1)`; the head reuses the
    /// last rate.
    pub dropout_rates: Vec<f64>,
    pub l2_lambda: f64,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_widths: Vec<usize>, dropout: f64, l2_lambda: f64) -> Self {
        let rates = vec![dropout; hidden_widths.len()];
        Self {
            input_dim,
            hidden_widths,
            dropout_rates: rates,
            l2_lambda,
        }
    }

    fn validate(&self) -> Result<(), NnError> {
        if self.input_dim == 0 {
            return Err(NnError::InvalidSpec(String::from("input_dim must be >= 1")));
        }
        if self.hidden_widths.is_empty() {
            return Err(NnError::InvalidSpec(String::from(
                "hidden_widths must be nonempty",
            )));
        }
        if self.hidden_widths.contains(&0) {
            return Err(NnError::InvalidSpec(String::from("zero-width layer")));
        }
        if self.dropout_rates.len() != self.hidden_widths.len() {
            return Err(NnError::InvalidSpec(String::from(
                "dropout_rates length must match hidden_widths",
            )));
        }
        if self.dropout_rates.iter().any(|&r| !(0.0..1.0).contains(&r)) {
            return Err(NnError::InvalidSpec(String::from(
                "dropout rates must lie in [0, 1)",
            )));
        }
        if self.l2_lambda < 0.0 || self.l2_lambda.is_nan() {
            return Err(NnError::InvalidSpec(String::from("l2_lambda must be >= 0")));
        }
        Ok(())
    }

    /// Hidden layer widths including the fixed head.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut w = self.hidden_widths.clone();
        w.push(HEAD_WIDTH);
        w
    }

    /// Dropout rate applied after the head activation.
    pub fn head_dropout(&self) -> f64 {
        *self.dropout_rates.last().expect("validated nonempty")
    }
}

/// Named architectures from the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelPreset {
    /// Raw-entry baseline: input `n^2`.
    Raw49,
    /// Hybrid derived + raw input (`3 + 3n + n^2`), extra 2056 layer.
    Hybrid73,
    /// `|c0|, |c1|` only; hybrid architecture with input 2.
    TwoFeat,
    /// `|c0/c1|` only; hybrid architecture with input 1.
    OneFeat,
    /// Hybrid architecture with stronger L2 for filtered subdomains.
    Subdomain,
}

impl ModelPreset {
    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::Raw49 => "RAW49",
            ModelPreset::Hybrid73 => "HYBRID73",
            ModelPreset::TwoFeat => "TWOFEAT",
            ModelPreset::OneFeat => "ONEFEAT",
            ModelPreset::Subdomain => "SUBDOMAIN",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RAW49" => Some(ModelPreset::Raw49),
            "HYBRID73" => Some(ModelPreset::Hybrid73),
            "TWOFEAT" => Some(ModelPreset::TwoFeat),
            "ONEFEAT" => Some(ModelPreset::OneFeat),
            "SUBDOMAIN" => Some(ModelPreset::Subdomain),
            _ => None,
        }
    }

    /// Spec for matrices of dimension `n`.
    pub fn spec(self, n: usize) -> MlpSpec {
        let base = vec![1024, 512, 256, 128, 64, 32];
        let mut hybrid = vec![2056];
        hybrid.extend_from_slice(&base);
        match self {
            ModelPreset::Raw49 => MlpSpec::new(n * n, base, 0.25, 1e-4),
            ModelPreset::Hybrid73 => MlpSpec::new(3 + 3 * n + n * n, hybrid, 0.35, 1e-4),
            ModelPreset::TwoFeat => MlpSpec::new(2, hybrid, 0.35, 1e-4),
            ModelPreset::OneFeat => MlpSpec::new(1, hybrid, 0.35, 1e-4),
            ModelPreset::Subdomain => MlpSpec::new(3 + 3 * n + n * n, hybrid, 0.35, 1e-3),
        }
    }
}

/// One dense layer, weights row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseLayer {
    pub(crate) w: Vec<f64>,
    pub(crate) b: Vec<f64>,
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
}

impl DenseLayer {
    fn he_uniform(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| rng.uniform(-limit, limit))
            .collect();
        Self {
            w,
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
        }
    }

    #[inline]
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.w[i * self.in_dim..(i + 1) * self.in_dim];
            let mut s = self.b[i];
            for (wj, xj) in row.iter().zip(x) {
                s += wj * xj;
            }
            *o = s;
        }
    }
}

/// Bookkeeping attached to a trained model.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

/// A feed-forward classifier with a scalar sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub spec: MlpSpec,
    pub(crate) layers: Vec<DenseLayer>,
    pub train_meta: TrainMeta,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    // Keep the advertised open interval even for saturating logits.
    p.clamp(1e-300, 1.0 - 1e-16)
}

/// Forward-pass scratch retained for backpropagation.
pub(crate) struct ForwardTrace {
    /// Post-activation (and post-dropout) outputs per layer, input first.
    pub(crate) activations: Vec<Vec<f64>>,
    /// Pre-activations per layer.
    pub(crate) pre: Vec<Vec<f64>>,
    /// Dropout scale per unit (1/keep or 0), parallel to hidden layers.
    pub(crate) drop_scale: Vec<Vec<f64>>,
    /// Final logit and probability.
    pub(crate) logit: f64,
    pub(crate) prob: f64,
}

impl MlpModel {
    /// He-uniform initialized model, deterministic per seed.
    pub fn build(spec: MlpSpec, seed: u64) -> Result<Self, NnError> {
        spec.validate()?;
        let mut rng = RngStream::new(seed, STREAM_INIT);
        let mut layers = Vec::new();
        let mut in_dim = spec.input_dim;
        for &w in spec.layer_widths().iter() {
            layers.push(DenseLayer::he_uniform(in_dim, w, &mut rng));
            in_dim = w;
        }
        layers.push(DenseLayer::he_uniform(in_dim, 1, &mut rng));
        Ok(Self {
            spec,
            layers,
            train_meta: TrainMeta {
                seed,
                ..TrainMeta::default()
            },
        })
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    /// Number of f64 parameters (weights then biases, layer by layer).
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flattened parameters in checkpoint order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    /// Rebuild a model from a spec and flattened parameters.
    pub fn from_flat_params(
        spec: MlpSpec,
        params: &[f64],
        train_meta: TrainMeta,
    ) -> Result<Self, NnError> {
        spec.validate()?;
        let mut layers = Vec::new();
        let mut in_dim = spec.input_dim;
        let mut dims: Vec<usize> = spec.layer_widths();
        dims.push(1);
        let mut offset = 0usize;
        for out_dim in dims {
            let wn = in_dim * out_dim;
            if offset + wn + out_dim > params.len() {
                return Err(NnError::InvalidSpec(String::from(
                    "parameter block too short for spec",
                )));
            }
            let w = params[offset..offset + wn].to_vec();
            offset += wn;
            let b = params[offset..offset + out_dim].to_vec();
            offset += out_dim;
            layers.push(DenseLayer {
                w,
                b,
                in_dim,
                out_dim,
            });
            in_dim = out_dim;
        }
        if offset != params.len() {
            return Err(NnError::InvalidSpec(String::from(
                "parameter block too long for spec",
            )));
        }
        Ok(Self {
            spec,
            layers,
            train_meta,
        })
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.spec.input_dim {
            return Err(NnError::DimensionMismatch {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Full forward pass. `dropout_rng` enables training-mode inverted
    /// dropout; `None` is deterministic inference.
    pub(crate) fn forward_trace(
        &self,
        x: &[f64],
        dropout_rng: Option<&mut RngStream>,
    ) -> ForwardTrace {
        let n_hidden = self.layers.len() - 1;
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut drop_scale: Vec<Vec<f64>> = Vec::with_capacity(n_hidden);
        activations.push(x.to_vec());
        let mut rng = dropout_rng;

        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.out_dim];
            layer.apply(activations.last().expect("nonempty"), &mut z);
            if li < n_hidden {
                let rate = if li < self.spec.hidden_widths.len() {
                    self.spec.dropout_rates[li]
                } else {
                    self.spec.head_dropout()
                };
                let mut a: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
                let scale: Vec<f64> = match (&mut rng, rate > 0.0) {
                    (Some(r), true) => {
                        let keep = 1.0 - rate;
                        a.iter_mut()
                            .map(|v| {
                                if r.next_f64() < keep {
                                    *v /= keep;
                                    1.0 / keep
                                } else {
                                    *v = 0.0;
                                    0.0
                                }
                            })
                            .collect()
                    }
                    _ => vec![1.0; a.len()],
                };
                pre.push(z);
                drop_scale.push(scale);
                activations.push(a);
            } else {
                let logit = z[0];
                let prob = sigmoid(logit);
                pre.push(z);
                return ForwardTrace {
                    activations,
                    pre,
                    drop_scale,
                    logit,
                    prob,
                };
            }
        }
        unreachable!("output layer returns");
    }

    /// Classification probability for one input.
    pub fn forward(
        &self,
        x: &[f64],
        train_mode: bool,
        dropout_rng: Option<&mut RngStream>,
    ) -> Result<f64, NnError> {
        self.check_input(x)?;
        let rng = if train_mode { dropout_rng } else { None };
        Ok(self.forward_trace(x, rng).prob)
    }

    /// Deterministic inference probability.
    pub fn predict(&self, x: &[f64]) -> Result<f64, NnError> {
        self.forward(x, false, None)
    }

    /// Gradient of the output probability with respect to the input,
    /// inference mode.
    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let trace = self.forward_trace(x, None);
        // dF/dz_out = sigma'(z) = p (1 - p).
        let delta_out = trace.prob * (1.0 - trace.prob);
        Ok(self.backprop_to_input(&trace, delta_out))
    }

    /// Propagate an output-logit sensitivity down to the input vector.
    pub(crate) fn backprop_to_input(&self, trace: &ForwardTrace, delta_out: f64) -> Vec<f64> {
        let n_hidden = self.layers.len() - 1;
        let mut delta = vec![delta_out];
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let mut prev = vec![0.0; layer.in_dim];
            for (i, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.w[i * layer.in_dim..(i + 1) * layer.in_dim];
                for (p, wj) in prev.iter_mut().zip(row) {
                    *p += wj * d;
                }
            }
            if li > 0 {
                let hi = li - 1;
                debug_assert!(hi < n_hidden);
                let z = &trace.pre[hi];
                let scale = &trace.drop_scale[hi];
                for ((p, &zj), &s) in prev.iter_mut().zip(z).zip(scale) {
                    *p *= if zj > 0.0 { s } else { 0.0 };
                }
            }
            delta = prev;
        }
        delta
    }
}

/// A scalar-valued differentiable function of a fixed-size input; the
/// interface attribution methods operate on.
pub trait DifferentiableFn {
    fn input_dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

impl DifferentiableFn for MlpModel {
    fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.predict(x).expect("dimension checked by caller")
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.input_gradient(x).expect("dimension checked by caller")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(input: usize) -> MlpSpec {
        MlpSpec::new(input, vec![8, 4], 0.0, 0.0)
    }

    #[test]
    fn hybrid_preset_layer_widths() {
        let spec = ModelPreset::Hybrid73.spec(7);
        assert_eq!(spec.input_dim, 73);
        assert_eq!(
            spec.layer_widths(),
            vec![2056, 1024, 512, 256, 128, 64, 32, 32]
        );
        assert_eq!(spec.dropout_rates[0], 0.35);
        assert_eq!(spec.l2_lambda, 1e-4);
    }

    #[test]
    fn raw_preset_regularization() {
        let spec = ModelPreset::Raw49.spec(7);
        assert_eq!(spec.input_dim, 49);
        assert_eq!(spec.l2_lambda, 1e-4);
        assert_eq!(spec.dropout_rates, vec![0.25; 6]);
        assert_eq!(ModelPreset::Subdomain.spec(7).l2_lambda, 1e-3);
        assert_eq!(ModelPreset::TwoFeat.spec(7).input_dim, 2);
        assert_eq!(ModelPreset::OneFeat.spec(7).input_dim, 1);
    }

    #[test]
    fn build_is_deterministic_per_seed() {
        let a = MlpModel::build(tiny_spec(3), 9).unwrap();
        let b = MlpModel::build(tiny_spec(3), 9).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        let c = MlpModel::build(tiny_spec(3), 10).unwrap();
        assert_ne!(a.flat_params(), c.flat_params());
    }

    #[test]
    fn invalid_specs_rejected() {
        let empty = MlpSpec::new(3, vec![], 0.0, 0.0);
        assert!(matches!(
            MlpModel::build(empty, 0),
            Err(NnError::InvalidSpec(_))
        ));
        let bad_rate = MlpSpec {
            input_dim: 3,
            hidden_widths: vec![4],
            dropout_rates: vec![1.0],
            l2_lambda: 0.0,
        };
        assert!(MlpModel::build(bad_rate, 0).is_err());
    }

    #[test]
    fn zero_weight_model_outputs_half() {
        let mut m = MlpModel::build(tiny_spec(4), 1).unwrap();
        for l in &mut m.layers {
            l.w.iter_mut().for_each(|w| *w = 0.0);
        }
        let p = m.predict(&[0.3, -2.0, 5.0, 0.0]).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn inference_is_deterministic_and_checks_dims() {
        let m = MlpModel::build(tiny_spec(2), 3).unwrap();
        let p1 = m.predict(&[0.5, -0.25]).unwrap();
        let p2 = m.predict(&[0.5, -0.25]).unwrap();
        assert_eq!(p1, p2);
        assert!(p1 > 0.0 && p1 < 1.0);
        assert!(matches!(
            m.predict(&[1.0]),
            Err(NnError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn single_linear_layer_closed_forms() {
        // Hand-build sigmoid(w.x + b) with w = (1, -1), b = 0.
        let spec = MlpSpec {
            input_dim: 2,
            hidden_widths: vec![1],
            dropout_rates: vec![0.0],
            l2_lambda: 0.0,
        };
        let mut m = MlpModel::build(spec, 0).unwrap();
        // Route the input through identity-ish layers: set hidden and head
        // to pass through coordinate w.x.
        m.layers[0].w = vec![1.0, -1.0];
        m.layers[0].b = vec![0.0];
        for l in m.layers.iter_mut().skip(1) {
            l.w.iter_mut().for_each(|w| *w = 0.0);
            l.b.iter_mut().for_each(|b| *b = 0.0);
        }
        // w[1x1] = 1 for head and output.
        m.layers[1].w[0] = 1.0;
        m.layers[2].w[0] = 1.0;
        let p = m.predict(&[2.0, 1.0]).unwrap();
        let want = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((p - want).abs() < 1e-12, "{p} vs {want}");

        // gradient = sigma'(z) * w through the linear chain.
        let g = m.input_gradient(&[2.0, 1.0]).unwrap();
        let sp = want * (1.0 - want);
        assert!((g[0] - sp).abs() < 1e-12);
        assert!((g[1] + sp).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = RngStream::new(17, 0);
        for trial in 0..20 {
            let m = MlpModel::build(tiny_spec(5), trial).unwrap();
            let x: Vec<f64> = (0..5).map(|_| rng.next_open_sym()).collect();
            let g = m.input_gradient(&x).unwrap();
            let h = 1e-5;
            for i in 0..5 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (m.predict(&xp).unwrap() - m.predict(&xm).unwrap()) / (2.0 * h);
                let denom = fd.abs().max(g[i].abs()).max(1e-8);
                assert!(
                    (g[i] - fd).abs() / denom < 1e-4,
                    "trial {trial} coord {i}: {} vs {}",
                    g[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn dead_relu_blocks_gradient() {
        let spec = MlpSpec {
            input_dim: 1,
            hidden_widths: vec![1],
            dropout_rates: vec![0.0],
            l2_lambda: 0.0,
        };
        let mut m = MlpModel::build(spec, 0).unwrap();
        // First layer produces a negative pre-activation for positive x.
        m.layers[0].w = vec![-1.0];
        m.layers[0].b = vec![-1.0];
        let g = m.input_gradient(&[2.0]).unwrap();
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn flat_param_round_trip() {
        let m = MlpModel::build(tiny_spec(3), 11).unwrap();
        let params = m.flat_params();
        let r = MlpModel::from_flat_params(m.spec.clone(), &params, m.train_meta.clone()).unwrap();
        assert_eq!(m, r);
        assert!(
            MlpModel::from_flat_params(m.spec.clone(), &params[1..], TrainMeta::default()).is_err()
        );
    }
}
