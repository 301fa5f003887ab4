//! Mini-batch Adam training with a stratified validation split, dropout,
//! L2 regularization, and patience-based early stopping.
//!
//! The optimizer minimizes `mean BCE + l2_lambda * sum(W^2)`. Validation
//! loss is plain BCE evaluated in inference mode; when it stops improving
//! for `patience` epochs the loop ends and the best-validation
//! parameters are restored.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{
    confusion_from_probs, ConfusionCounts, DenseLayer, MlpModel, NnError, STREAM_DROPOUT,
    STREAM_SHUFFLE, STREAM_SPLIT,
};
use crate::rng::RngStream;

/// Borrowed labeled design matrix (flat row-major features).
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    x: &'a [f64],
    dim: usize,
    y: &'a [bool],
}

impl<'a> DataView<'a> {
    pub fn new(x: &'a [f64], dim: usize, y: &'a [bool]) -> Self {
        assert!(dim > 0);
        assert_eq!(x.len(), dim * y.len(), "feature block shape mismatch");
        Self { x, dim, y }
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> bool {
        self.y[i]
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 25,
            patience: 6,
            val_fraction: 0.2,
            seed: 42,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NnError> {
        use alloc::string::String;
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(NnError::InvalidSpec(String::from(
                "val_fraction must lie in (0, 1)",
            )));
        }
        if self.patience > self.max_epochs {
            return Err(NnError::InvalidSpec(String::from(
                "patience must not exceed max_epochs",
            )));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(NnError::InvalidSpec(String::from(
                "batch_size and max_epochs must be >= 1",
            )));
        }
        if self.learning_rate <= 0.0 || self.learning_rate.is_nan() {
            return Err(NnError::InvalidSpec(String::from(
                "learning_rate must be positive",
            )));
        }
        Ok(())
    }
}

/// Losses and accuracies at the end of one epoch (inference mode).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochStats {
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

/// Per-epoch history of a training run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    fn new(layers: &[DenseLayer]) -> Self {
        Self {
            m_w: layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            v_w: layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            m_b: layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
            v_b: layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, layers: &mut [DenseLayer], grads: &LayerGrads, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for (li, layer) in layers.iter_mut().enumerate() {
            update_params(
                &mut layer.w,
                &grads.dw[li],
                &mut self.m_w[li],
                &mut self.v_w[li],
                lr,
                bc1,
                bc2,
            );
            update_params(
                &mut layer.b,
                &grads.db[li],
                &mut self.m_b[li],
                &mut self.v_b[li],
                lr,
                bc1,
                bc2,
            );
        }
    }
}

fn update_params(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

struct LayerGrads {
    dw: Vec<Vec<f64>>,
    db: Vec<Vec<f64>>,
}

impl LayerGrads {
    fn zeros(layers: &[DenseLayer]) -> Self {
        Self {
            dw: layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            db: layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        for g in self.dw.iter_mut().chain(self.db.iter_mut()) {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Numerically stable binary cross-entropy from the logit.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Accumulate gradients of BCE w.r.t. all parameters for one sample.
fn backprop_sample(
    model: &MlpModel,
    x: &[f64],
    y: f64,
    rng: &mut RngStream,
    grads: &mut LayerGrads,
) -> f64 {
    let trace = model.forward_trace(x, Some(rng));
    let loss = bce_from_logit(trace.logit, y);
    // dL/dz_out for sigmoid + BCE.
    let mut delta = vec![trace.prob - y];
    let n_hidden = model.layers.len() - 1;
    for li in (0..model.layers.len()).rev() {
        let layer = &model.layers[li];
        let a_prev = &trace.activations[li];
        // Parameter gradients.
        for (i, &d) in delta.iter().enumerate() {
            grads.db[li][i] += d;
            if d == 0.0 {
                continue;
            }
            let row = &mut grads.dw[li][i * layer.in_dim..(i + 1) * layer.in_dim];
            for (g, &a) in row.iter_mut().zip(a_prev) {
                *g += d * a;
            }
        }
        if li == 0 {
            break;
        }
        // Propagate to the previous activation.
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
        let hi = li - 1;
        debug_assert!(hi < n_hidden);
        let z = &trace.pre[hi];
        let scale = &trace.drop_scale[hi];
        for ((p, &zj), &s) in prev.iter_mut().zip(z).zip(scale) {
            *p *= if zj > 0.0 { s } else { 0.0 };
        }
        delta = prev;
    }
    loss
}

/// Inference-mode mean BCE and accuracy over an index set.
fn evaluate_indices(model: &MlpModel, data: &DataView, idx: &[usize]) -> (f64, f64) {
    if idx.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for &i in idx {
        let trace = model.forward_trace(data.row(i), None);
        let y = if data.label(i) { 1.0 } else { 0.0 };
        loss += bce_from_logit(trace.logit, y);
        if (trace.prob > 0.5) == data.label(i) {
            correct += 1;
        }
    }
    (loss / idx.len() as f64, correct as f64 / idx.len() as f64)
}

/// Stratified train/validation index split, depending only on the
/// labels and `(seed, val_fraction, shuffle)`; callers that must fit
/// preprocessing on training rows only can reproduce the exact split
/// [`train`] uses internally.
pub fn stratified_split(labels: &[bool], cfg: &TrainConfig) -> (Vec<usize>, Vec<usize>) {
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if cfg.shuffle {
        let mut rng = RngStream::new(cfg.seed, STREAM_SPLIT);
        rng.shuffle(&mut pos);
        rng.shuffle(&mut neg);
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [pos, neg] {
        let n_val = (class.len() as f64 * cfg.val_fraction) as usize;
        let cut = class.len() - n_val;
        train.extend_from_slice(&class[..cut]);
        val.extend_from_slice(&class[cut..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Train `model` in place; returns the per-epoch history.
pub fn train(
    model: &mut MlpModel,
    data: DataView,
    cfg: &TrainConfig,
) -> Result<TrainHistory, NnError> {
    cfg.validate()?;
    if data.dim() != model.input_dim() {
        return Err(NnError::DimensionMismatch {
            expected: model.input_dim(),
            got: data.dim(),
        });
    }
    let labels: Vec<bool> = (0..data.n_rows()).map(|i| data.label(i)).collect();
    let (train_idx, val_idx) = stratified_split(&labels, cfg);
    let has_pos = train_idx.iter().any(|&i| data.label(i));
    let has_neg = train_idx.iter().any(|&i| !data.label(i));
    if !has_pos || !has_neg {
        return Err(NnError::DegenerateData);
    }

    let mut adam = AdamState::new(&model.layers);
    let mut grads = LayerGrads::zeros(&model.layers);
    let mut shuffle_rng = RngStream::new(cfg.seed, STREAM_SHUFFLE);
    let mut dropout_rng = RngStream::new(cfg.seed, STREAM_DROPOUT);

    let mut order = train_idx.clone();
    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params: Option<Vec<f64>> = None;
    let mut strikes = 0usize;
    let mut stopped_early = false;
    let lambda = model.spec.l2_lambda;

    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle {
            shuffle_rng.shuffle(&mut order);
        }
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            for &i in batch {
                let y = if data.label(i) { 1.0 } else { 0.0 };
                backprop_sample(model, data.row(i), y, &mut dropout_rng, &mut grads);
            }
            let inv = 1.0 / batch.len() as f64;
            for (li, layer) in model.layers.iter().enumerate() {
                for (g, &w) in grads.dw[li].iter_mut().zip(&layer.w) {
                    *g = *g * inv + 2.0 * lambda * w;
                }
                for g in grads.db[li].iter_mut() {
                    *g *= inv;
                }
            }
            adam.step(&mut model.layers, &grads, cfg.learning_rate);
        }

        if model
            .layers
            .iter()
            .any(|l| l.w.iter().chain(&l.b).any(|v| !v.is_finite()))
        {
            return Err(NnError::NonFiniteParameters { epoch });
        }

        let (train_loss, train_acc) = evaluate_indices(model, &data, &train_idx);
        let (val_loss, val_acc) = evaluate_indices(model, &data, &val_idx);
        history.push(EpochStats {
            train_loss,
            val_loss,
            train_acc,
            val_acc,
        });

        if !val_idx.is_empty() {
            if val_loss < best_val {
                best_val = val_loss;
                best_epoch = epoch;
                best_params = Some(model.flat_params());
                strikes = 0;
            } else {
                strikes += 1;
                if strikes >= cfg.patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    if let Some(params) = best_params {
        *model = MlpModel::from_flat_params(model.spec.clone(), &params, model.train_meta.clone())?;
    }
    model.train_meta.seed = cfg.seed;
    model.train_meta.epochs_run = history.len();
    model.train_meta.best_epoch = best_epoch;

    Ok(TrainHistory {
        epochs: history,
        best_epoch,
        stopped_early,
    })
}

/// Confusion counts of a model over labeled data at a decision
/// threshold (positive iff `p > threshold`).
pub fn evaluate(
    model: &MlpModel,
    data: DataView,
    threshold: f64,
) -> Result<ConfusionCounts, NnError> {
    if data.dim() != model.input_dim() {
        return Err(NnError::DimensionMismatch {
            expected: model.input_dim(),
            got: data.dim(),
        });
    }
    let probs: Vec<f64> = (0..data.n_rows())
        .map(|i| model.forward_trace(data.row(i), None).prob)
        .collect();
    let labels: Vec<bool> = (0..data.n_rows()).map(|i| data.label(i)).collect();
    Ok(confusion_from_probs(&probs, &labels, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::MlpSpec;

    fn blob_data(n_per_class: usize, gap: f64, seed: u64) -> (Vec<f64>, Vec<bool>) {
        // Two 2-D blobs separated along x.
        let mut rng = RngStream::new(seed, 0);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..2 * n_per_class {
            let pos = i % 2 == 0;
            let center = if pos { gap } else { -gap };
            x.push(center + 0.3 * rng.next_open_sym());
            x.push(0.3 * rng.next_open_sym());
            y.push(pos);
        }
        (x, y)
    }

    fn small_cfg(seed: u64, epochs: usize) -> TrainConfig {
        TrainConfig {
            max_epochs: epochs,
            patience: epochs,
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn xor_is_learned() {
        let x = alloc::vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
        let y = alloc::vec![false, true, true, false];
        let spec = MlpSpec::new(2, alloc::vec![8, 8], 0.0, 0.0);
        let mut model = MlpModel::build(spec, 3).unwrap();
        let cfg = TrainConfig {
            max_epochs: 2000,
            patience: 2000,
            batch_size: 4,
            val_fraction: 0.2, // floor(1*0.2)=0 per class: no val rows
            seed: 3,
            ..TrainConfig::default()
        };
        train(&mut model, DataView::new(&x, 2, &y), &cfg).unwrap();
        let c = evaluate(&model, DataView::new(&x, 2, &y), 0.5).unwrap();
        assert_eq!(c.true_pos + c.true_neg, 4, "confusion {c:?}");
    }

    #[test]
    fn separable_blobs_reach_high_validation_accuracy() {
        let (x, y) = blob_data(200, 1.5, 7);
        let spec = MlpSpec::new(2, alloc::vec![16, 8], 0.0, 0.0);
        let mut model = MlpModel::build(spec, 1).unwrap();
        let hist = train(&mut model, DataView::new(&x, 2, &y), &small_cfg(1, 25)).unwrap();
        let last = hist.epochs.last().unwrap();
        assert!(last.val_acc >= 0.99, "val acc {}", last.val_acc);
    }

    #[test]
    fn training_loss_decreases_on_separable_data() {
        let (x, y) = blob_data(100, 1.0, 11);
        let spec = MlpSpec::new(2, alloc::vec![8, 4], 0.0, 0.0);
        let mut model = MlpModel::build(spec, 5).unwrap();
        let hist = train(&mut model, DataView::new(&x, 2, &y), &small_cfg(5, 10)).unwrap();
        assert!(
            hist.epochs[9].train_loss < hist.epochs[0].train_loss,
            "{:?}",
            hist.epochs
        );
    }

    #[test]
    fn early_stopping_triggers_on_noise() {
        // Labels uncorrelated with features: validation loss cannot keep
        // improving for long.
        let mut rng = RngStream::new(2, 0);
        let n = 200;
        let x: Vec<f64> = (0..2 * n).map(|_| rng.next_open_sym()).collect();
        let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let spec = MlpSpec::new(2, alloc::vec![16, 8], 0.0, 0.0);
        let mut model = MlpModel::build(spec, 2).unwrap();
        let cfg = TrainConfig {
            max_epochs: 100,
            patience: 3,
            seed: 2,
            ..TrainConfig::default()
        };
        let hist = train(&mut model, DataView::new(&x, 2, &y), &cfg).unwrap();
        assert!(hist.stopped_early);
        assert!(hist.epochs.len() < 100);
        assert_eq!(model.train_meta.best_epoch, hist.best_epoch);
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = blob_data(60, 1.0, 13);
        let spec = MlpSpec::new(2, alloc::vec![8, 4], 0.2, 1e-4);
        let cfg = small_cfg(9, 8);
        let mut m1 = MlpModel::build(spec.clone(), 9).unwrap();
        let h1 = train(&mut m1, DataView::new(&x, 2, &y), &cfg).unwrap();
        let mut m2 = MlpModel::build(spec, 9).unwrap();
        let h2 = train(&mut m2, DataView::new(&x, 2, &y), &cfg).unwrap();
        assert_eq!(m1.flat_params(), m2.flat_params());
        assert_eq!(h1, h2);
    }

    #[test]
    fn single_class_split_is_rejected() {
        let x = alloc::vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
        let y = alloc::vec![true; 5];
        let spec = MlpSpec::new(2, alloc::vec![4], 0.0, 0.0);
        let mut model = MlpModel::build(spec, 0).unwrap();
        let err = train(&mut model, DataView::new(&x, 2, &y), &small_cfg(0, 5)).unwrap_err();
        assert_eq!(err, NnError::DegenerateData);
    }

    #[test]
    fn patience_shortens_history() {
        let (x, y) = blob_data(50, 1.2, 21);
        let spec = MlpSpec::new(2, alloc::vec![8], 0.0, 0.0);
        let mut model = MlpModel::build(spec.clone(), 4).unwrap();
        let cfg = TrainConfig {
            max_epochs: 50,
            patience: 1,
            seed: 4,
            ..TrainConfig::default()
        };
        let hist = train(&mut model, DataView::new(&x, 2, &y), &cfg).unwrap();
        assert!(hist.epochs.len() <= 50);
        if hist.stopped_early {
            assert!(hist.epochs.len() < 50);
        }
    }
}
