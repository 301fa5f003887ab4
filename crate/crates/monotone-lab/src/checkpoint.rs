//! Model checkpoints, training history CSV, and metrics JSON.
//!
//! Checkpoint layout: magic `MMLP`, version byte, u32 header length, a
//! JSON header (spec, training meta, feature columns, schema hash,
//! optional standardizer), then the raw little-endian f64 parameter
//! block in layer order (weights row-major, then biases).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use monotone_core::features::Standardizer;
use monotone_core::nn::{ConfusionCounts, Metrics, MlpModel, MlpSpec, TrainHistory, TrainMeta};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

const MAGIC: [u8; 4] = *b"MMLP";
const VERSION: u8 = 0x01;

/// FNV-1a over feature names; identifies the input schema of a model.
pub fn schema_hash(names: &[String]) -> String {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for name in names {
        for b in name.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{h:016x}")
}

/// JSON header stored in front of the parameter block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub spec: MlpSpec,
    pub train_meta: TrainMeta,
    pub seed: u64,
    /// Preset the model was built from, when any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Feature columns the model consumes, in input order.
    pub columns: Vec<String>,
    pub schema_hash: String,
    /// Input scaler fitted on the training split, when one was used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardizer: Option<Standardizer>,
}

pub fn save_model(
    path: &Path,
    model: &MlpModel,
    header: &CheckpointHeader,
) -> Result<(), LabError> {
    let json = serde_json::to_vec(header)?;
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(&MAGIC).map_err(LabError::io(path))?;
    w.write_all(&[VERSION]).map_err(LabError::io(path))?;
    w.write_all(&(json.len() as u32).to_le_bytes())
        .map_err(LabError::io(path))?;
    w.write_all(&json).map_err(LabError::io(path))?;
    for v in model.flat_params() {
        w.write_all(&v.to_le_bytes()).map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

pub fn load_model(path: &Path) -> Result<(MlpModel, CheckpointHeader), LabError> {
    let file = File::open(path).map_err(LabError::io(path))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(LabError::io(path))?;
    if magic != MAGIC {
        return Err(LabError::Format(format!(
            "{}: not a model checkpoint",
            path.display()
        )));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version).map_err(LabError::io(path))?;
    if version[0] != VERSION {
        return Err(LabError::Format(format!(
            "{}: unsupported checkpoint version {}",
            path.display(),
            version[0]
        )));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(LabError::io(path))?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json).map_err(LabError::io(path))?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;

    let mut block = Vec::new();
    r.read_to_end(&mut block).map_err(LabError::io(path))?;
    if !block.len().is_multiple_of(8) {
        return Err(LabError::Format(format!(
            "{}: parameter block length {} is not a multiple of 8",
            path.display(),
            block.len()
        )));
    }
    let params: Vec<f64> = block
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunked by 8")))
        .collect();
    let model = MlpModel::from_flat_params(header.spec.clone(), &params, header.train_meta.clone())
        .map_err(|e| LabError::Format(format!("{}: {e}", path.display())))?;
    Ok((model, header))
}

/// `epoch,train_loss,val_loss,train_acc,val_acc` per line.
pub fn write_history_csv(path: &Path, history: &TrainHistory) -> Result<(), LabError> {
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(b"epoch,train_loss,val_loss,train_acc,val_acc\n")
        .map_err(LabError::io(path))?;
    for (i, e) in history.epochs.iter().enumerate() {
        w.write_all(
            format!(
                "{},{},{},{},{}\n",
                i + 1,
                e.train_loss,
                e.val_loss,
                e.train_acc,
                e.val_acc
            )
            .as_bytes(),
        )
        .map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

/// One evaluation block of the metrics JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tp: u64,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
}

impl MetricsBlock {
    pub fn new(c: &ConfusionCounts, m: &Metrics) -> Self {
        Self {
            tn: c.true_neg,
            fp: c.false_pos,
            fn_: c.false_neg,
            tp: c.true_pos,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            specificity: m.specificity,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub preset: String,
    pub full: MetricsBlock,
    pub validation: Option<MetricsBlock>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub stopped_early: bool,
    /// Rows dropped because their ratio feature was undefined.
    pub excluded_undefined_ratio: usize,
}

pub fn write_metrics_json(path: &Path, report: &MetricsReport) -> Result<(), LabError> {
    let file = File::create(path).map_err(LabError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), report)?;
    Ok(())
}
