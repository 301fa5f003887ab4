//! Plot-ready output files: attribution tables, EVT diagnostics, tree
//! rules and bands, SVM hyperplanes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use monotone_core::evt::{BootstrapCi, Endpoint, MrlCurve, StabilityScan, TailSummary};
use monotone_core::surrogate::{DecisionTree, LinearSvmModel, MonotoneBand, TreeNode};
use monotone_core::xai::AttributionReport;
use serde::Serialize;

use crate::error::LabError;

fn create(path: &Path) -> Result<BufWriter<File>, LabError> {
    Ok(BufWriter::new(
        File::create(path).map_err(LabError::io(path))?,
    ))
}

/// `feature,mean_abs_ig,rank` in descending salience order.
pub fn write_attribution_csv(path: &Path, report: &AttributionReport) -> Result<(), LabError> {
    let mut w = create(path)?;
    w.write_all(b"feature,mean_abs_ig,rank\n")
        .map_err(LabError::io(path))?;
    for (rank, (name, score)) in report.ranked().iter().enumerate() {
        w.write_all(format!("{name},{score},{}\n", rank + 1).as_bytes())
            .map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

#[derive(Serialize)]
struct TopKEntry<'a> {
    name: &'a str,
    mean_abs_ig: f64,
    rank: usize,
}

#[derive(Serialize)]
struct TopKJson<'a> {
    top_k: usize,
    steps: usize,
    quadrature: &'a str,
    baseline: &'a str,
    baseline_hash: String,
    mean_residual: f64,
    max_residual: f64,
    completeness_tol: f64,
    completeness_violations: usize,
    features: Vec<TopKEntry<'a>>,
}

/// Top-k ranking JSON for bar-chart plotting.
pub fn write_topk_json(
    path: &Path,
    report: &AttributionReport,
    top_k: usize,
    steps: usize,
    quadrature: &str,
    baseline: &str,
) -> Result<(), LabError> {
    let features = report
        .ranked()
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(i, (name, score))| TopKEntry {
            name,
            mean_abs_ig: score,
            rank: i + 1,
        })
        .collect();
    let mean_residual = report.completeness_residuals.iter().sum::<f64>()
        / report.completeness_residuals.len().max(1) as f64;
    let json = TopKJson {
        top_k,
        steps,
        quadrature,
        baseline,
        baseline_hash: format!("{:016x}", report.baseline_hash),
        mean_residual,
        max_residual: report.max_residual(),
        completeness_tol: report.completeness_tol,
        completeness_violations: report.completeness_violations(),
        features,
    };
    let file = File::create(path).map_err(LabError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &json)?;
    Ok(())
}

/// Per-sample IG matrix in the checkpoint block format: magic, u32
/// header length, JSON `{rows, cols, names}`, then f64 LE values.
pub fn write_ig_matrix(path: &Path, report: &AttributionReport) -> Result<(), LabError> {
    #[derive(Serialize)]
    struct Header<'a> {
        rows: usize,
        cols: usize,
        names: &'a [String],
    }
    let header = serde_json::to_vec(&Header {
        rows: report.n_rows,
        cols: report.feature_names.len(),
        names: &report.feature_names,
    })?;
    let mut w = create(path)?;
    w.write_all(b"MIGB").map_err(LabError::io(path))?;
    w.write_all(&[0x01]).map_err(LabError::io(path))?;
    w.write_all(&(header.len() as u32).to_le_bytes())
        .map_err(LabError::io(path))?;
    w.write_all(&header).map_err(LabError::io(path))?;
    for v in &report.per_sample {
        w.write_all(&v.to_le_bytes()).map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

pub fn write_mrl_csv(path: &Path, curve: &MrlCurve) -> Result<(), LabError> {
    let mut w = create(path)?;
    w.write_all(b"threshold,mean_excess,count,flagged\n")
        .map_err(LabError::io(path))?;
    for i in 0..curve.thresholds.len() {
        w.write_all(
            format!(
                "{},{},{},{}\n",
                curve.thresholds[i],
                if curve.mean_excess[i].is_nan() {
                    String::new()
                } else {
                    format!("{}", curve.mean_excess[i])
                },
                curve.counts[i],
                u8::from(curve.flagged[i])
            )
            .as_bytes(),
        )
        .map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

/// Stability scan CSV; failed rows keep their threshold with empty
/// estimates and converged = 0.
pub fn write_stability_csv(
    path: &Path,
    scan: &StabilityScan,
    probe: Option<f64>,
) -> Result<(), LabError> {
    let mut w = create(path)?;
    w.write_all(b"threshold,xi,sigma,se_xi,n_exceed,converged,exceed_prob\n")
        .map_err(LabError::io(path))?;
    for (u, fit) in scan.thresholds.iter().zip(&scan.fits) {
        let line = match fit {
            Ok(f) => {
                let p = probe
                    .and_then(|t| monotone_core::evt::exceedance_prob(f, t).ok())
                    .map(|p| format!("{p}"))
                    .unwrap_or_default();
                format!(
                    "{u},{},{},{},{},1,{p}\n",
                    f.xi, f.sigma, f.se_xi, f.n_exceed
                )
            }
            Err(_) => format!("{u},,,,,0,\n"),
        };
        w.write_all(line.as_bytes()).map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

pub fn write_bootstrap_csv(path: &Path, ci: &BootstrapCi) -> Result<(), LabError> {
    let mut w = create(path)?;
    w.write_all(b"replicate,exceed_prob\n")
        .map_err(LabError::io(path))?;
    for (i, p) in ci.probs.iter().enumerate() {
        w.write_all(format!("{i},{p}\n").as_bytes())
            .map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

#[derive(Serialize)]
struct TailJson {
    sample_max: f64,
    endpoint: Option<f64>,
    unbounded: bool,
    level: f64,
    exceed_prob: f64,
    ci_low: f64,
    ci_high: f64,
    u: f64,
    xi: f64,
    sigma: f64,
    se_xi: f64,
    se_sigma: f64,
    n_exceed: usize,
    n_total: usize,
    loglik: f64,
}

pub fn write_tail_json(path: &Path, s: &TailSummary) -> Result<(), LabError> {
    let (endpoint, unbounded) = match s.endpoint {
        Endpoint::Finite(e) => (Some(e), false),
        Endpoint::Unbounded => (None, true),
    };
    let json = TailJson {
        sample_max: s.sample_max,
        endpoint,
        unbounded,
        level: s.level,
        exceed_prob: s.exceed_prob,
        ci_low: s.ci_low,
        ci_high: s.ci_high,
        u: s.fit.u,
        xi: s.fit.xi,
        sigma: s.fit.sigma,
        se_xi: s.fit.se_xi,
        se_sigma: s.fit.se_sigma,
        n_exceed: s.fit.n_exceed,
        n_total: s.fit.n_total,
        loglik: s.fit.loglik,
    };
    let file = File::create(path).map_err(LabError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &json)?;
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum TreeJson {
    Split {
        feature: String,
        threshold: f64,
        left: Box<TreeJson>,
        right: Box<TreeJson>,
    },
    Leaf {
        class: String,
        counts: [usize; 2],
    },
}

fn tree_json(tree: &DecisionTree, at: usize, names: &[String]) -> TreeJson {
    match &tree.nodes[at] {
        TreeNode::Leaf { class, counts } => TreeJson::Leaf {
            class: if *class { "monotone" } else { "non-monotone" }.to_string(),
            counts: *counts,
        },
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => TreeJson::Split {
            feature: names[*feature].clone(),
            threshold: *threshold,
            left: Box::new(tree_json(tree, *left, names)),
            right: Box::new(tree_json(tree, *right, names)),
        },
    }
}

/// Nested-node JSON export of a fitted tree.
pub fn write_tree_json(path: &Path, tree: &DecisionTree, names: &[String]) -> Result<(), LabError> {
    let json = tree_json(tree, 0, names);
    let file = File::create(path).map_err(LabError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &json)?;
    Ok(())
}

pub fn write_rules_txt(path: &Path, lines: &[String]) -> Result<(), LabError> {
    let mut w = create(path)?;
    for line in lines {
        w.write_all(line.as_bytes()).map_err(LabError::io(path))?;
        w.write_all(b"\n").map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

#[derive(Serialize)]
struct BandJson {
    r_min: f64,
    r_max: Option<f64>,
    s_min: f64,
    s_max: Option<f64>,
}

/// Monotone-leaf rectangles; infinite upper bounds serialize as null,
/// lower bounds clamp at 0 (the features are magnitudes).
pub fn write_bands_json(path: &Path, bands: &[MonotoneBand]) -> Result<(), LabError> {
    let rows: Vec<BandJson> = bands
        .iter()
        .map(|b| BandJson {
            r_min: b.r_min.max(0.0),
            r_max: b.r_max.is_finite().then_some(b.r_max),
            s_min: b.s_min.max(0.0),
            s_max: b.s_max.is_finite().then_some(b.s_max),
        })
        .collect();
    let file = File::create(path).map_err(LabError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct SvmJson {
    weights: Vec<(String, f64)>,
    bias: f64,
    c: f64,
    train_accuracy: f64,
    epochs: usize,
    final_objective: f64,
}

pub fn write_svm_json(
    path: &Path,
    model: &LinearSvmModel,
    names: &[String],
) -> Result<(), LabError> {
    let json = SvmJson {
        weights: names
            .iter()
            .cloned()
            .zip(model.weights.iter().copied())
            .collect(),
        bias: model.bias,
        c: model.c,
        train_accuracy: model.train_accuracy,
        epochs: model.objective_history.len(),
        final_objective: *model.objective_history.last().unwrap_or(&f64::NAN),
    };
    let file = File::create(path).map_err(LabError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &json)?;
    Ok(())
}
