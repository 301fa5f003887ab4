//! The `monotone-lab` command-line surface and its ten subcommands,
//! wiring dataset generation, feature extraction, training, attribution,
//! surrogate rules, tail analysis, the standalone matrix checker, and
//! the filtered-subdomain workflow.
//!
//! Each stage reads and writes files, so pipelines can be re-run
//! partially; every primary artifact gets a manifest sidecar.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use monotone_core::datagen;
use monotone_core::evt;
use monotone_core::features::{featurize_dataset, ratio_features, Standardizer, DEFAULT_DENOM_TOL};
use monotone_core::linalg::{char_poly, invert, lu_decompose, SquareMatrix, DEFAULT_PIVOT_TOL};
use monotone_core::nn::{self, metrics, DataView, MlpModel, MlpSpec, ModelPreset, TrainConfig};
use monotone_core::surrogate::{
    extract_monotone_bands, fit_linear_svm, fit_stump, fit_tree, symbolic_formula, SurrogateError,
};
use monotone_core::xai::{attribute_dataset, Baseline, IgConfig, Quadrature};

use crate::checkpoint::{
    load_model, save_model, schema_hash, write_history_csv, write_metrics_json, CheckpointHeader,
    MetricsBlock, MetricsReport,
};
use crate::config::ThresholdTable;
use crate::dataset_io::{export_csv, load_dataset, save_dataset};
use crate::error::LabError;
use crate::feature_io::{
    read_feature_csv, write_feature_csv, write_loaded_csv, write_schema_sidecar, LoadedTable,
};
use crate::manifest::RunManifest;
use crate::parallel::generate_balanced_parallel;
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "monotone-lab",
    version,
    about = "Monotone-matrix classification lab: datasets, features, classifiers, attribution, rules, and tail analysis"
)]
pub struct Cli {
    /// Seed for every random choice the subcommand makes.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Primary output path (or prefix for multi-file commands).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads for dataset generation.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rejection-sample a balanced labeled dataset.
    Gen(GenArgs),
    /// Extract the feature table of a dataset.
    Featurize(FeaturizeArgs),
    /// Train a classifier preset on a feature table.
    Train(TrainArgs),
    /// Integrated-gradients attribution of a trained model.
    Ig(IgArgs),
    /// Fit a CART tree on labels or on model predictions.
    Tree(TreeArgs),
    /// Accuracy-optimal depth-1 threshold on one feature.
    Stump(StumpArgs),
    /// Linear soft-margin SVM on selected features.
    Svm(SvmArgs),
    /// Peaks-over-threshold tail analysis of the monotone ratio.
    Evt(EvtArgs),
    /// Check one matrix: oracle, ratio rule, and closed-form score.
    Check(CheckArgs),
    /// Filter to small ratios, rebalance, retrain, and re-attribute.
    Subdomain(SubdomainArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Matrix dimension.
    #[arg(short, long)]
    pub n: usize,
    /// Samples per class.
    #[arg(long)]
    pub per_class: usize,
    /// Abort after this many rejection-sampling attempts.
    #[arg(long, default_value_t = datagen::DEFAULT_ATTEMPT_CAP)]
    pub attempt_cap: u64,
    /// Also export the dataset as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Input dataset file.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Keep raw feature values instead of z-scoring over the table.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Input feature CSV.
    #[arg(long)]
    pub features: PathBuf,
    /// RAW49 | HYBRID73 | TWOFEAT | ONEFEAT | SUBDOMAIN.
    #[arg(long)]
    pub preset: String,
    /// Override hidden widths, e.g. `64,32` (keeps the preset's dropout
    /// and L2); intended for smoke tests.
    #[arg(long)]
    pub widths: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 25)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 6)]
    pub patience: usize,
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    /// Skip fitting an input standardizer on the training split.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct IgArgs {
    /// Model checkpoint.
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV the model was trained against.
    #[arg(long)]
    pub features: PathBuf,
    /// Integration steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Baseline: mean | zero.
    #[arg(long, default_value = "mean")]
    pub baseline: String,
    /// Quadrature: trapezoid | midpoint.
    #[arg(long, default_value = "trapezoid")]
    pub quadrature: String,
    /// Features kept in the ranking JSON.
    #[arg(long, default_value_t = 30)]
    pub top_k: usize,
    /// Completeness residuals above this are reported as violations.
    #[arg(long, default_value_t = 1e-3)]
    pub completeness_tol: f64,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Fit target: labels | predictions.
    #[arg(long, default_value = "labels")]
    pub on: String,
    /// Checkpoint required when fitting on predictions.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 50)]
    pub min_leaf: usize,
    /// Comma-separated feature columns (default: all).
    #[arg(long)]
    pub cols: Option<String>,
}

#[derive(Debug, Args)]
pub struct StumpArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Feature to threshold: r01, r012, or any schema column.
    #[arg(long, default_value = "r01")]
    pub feature: String,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Comma-separated feature columns.
    #[arg(long, default_value = "abs_c_0,abs_c_1")]
    pub cols: String,
    /// Soft-margin penalty.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
}

#[derive(Debug, Args)]
pub struct EvtArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Rows to analyze: monotone | all.
    #[arg(long, default_value = "monotone")]
    pub class: String,
    /// POT threshold.
    #[arg(long, default_value_t = 0.075)]
    pub u: f64,
    /// Exceedance level (default: the sample maximum).
    #[arg(long)]
    pub t: Option<f64>,
    /// Stability-scan grid `lo:hi:count`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Bootstrap confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Matrix file: one row per line, entries separated by spaces or
    /// commas.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Inline matrix, rows separated by ';'.
    #[arg(long)]
    pub inline: Option<String>,
    /// Threshold-table config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tolerance for slightly negative inverse entries.
    #[arg(long, default_value_t = 0.0)]
    pub neg_tol: f64,
}

#[derive(Debug, Args)]
pub struct SubdomainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Keep rows with |c0/c1| strictly below this.
    #[arg(long, default_value_t = 0.08)]
    pub ratio_cut: f64,
    #[arg(long, default_value_t = 25)]
    pub max_epochs: usize,
    /// Hidden-width override for the retrained model (smoke tests).
    #[arg(long)]
    pub widths: Option<String>,
}

/// Run a parsed invocation; errors map to exit codes via
/// [`LabError::exit_code`].
pub fn run(cli: Cli) -> Result<(), LabError> {
    let common = Common {
        seed: cli.seed,
        out: cli.out,
        quiet: cli.quiet,
        threads: cli.threads.max(1),
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, &common),
        Command::Featurize(a) => cmd_featurize(&a, &common),
        Command::Train(a) => cmd_train(&a, &common),
        Command::Ig(a) => cmd_ig(&a, &common),
        Command::Tree(a) => cmd_tree(&a, &common),
        Command::Stump(a) => cmd_stump(&a, &common),
        Command::Svm(a) => cmd_svm(&a, &common),
        Command::Evt(a) => cmd_evt(&a, &common),
        Command::Check(a) => cmd_check(&a, &common),
        Command::Subdomain(a) => cmd_subdomain(&a, &common),
    }
}

#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub quiet: bool,
    pub threads: usize,
}

impl Common {
    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

pub fn cmd_gen(a: &GenArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let out = common.out_or(&format!("dataset_n{}.mono", a.n));
    let d =
        generate_balanced_parallel(a.n, a.per_class, common.seed, common.threads, a.attempt_cap)?;
    save_dataset(&d, &out)?;
    let mut manifest = RunManifest::new("gen")
        .arg("n", a.n)
        .arg("per_class", a.per_class)
        .arg("attempt_cap", a.attempt_cap)
        .arg("threads", common.threads)
        .seed(common.seed)
        .output(&out);
    if let Some(csv) = &a.csv {
        export_csv(&d, csv)?;
        manifest = manifest.output(csv);
    }
    manifest.write(&out, started.elapsed().as_secs_f64())?;
    common.note(&format!(
        "gen: {} samples per class (n={}) in {} attempts -> {}",
        a.per_class,
        a.n,
        d.meta.attempts,
        out.display()
    ));
    println!(
        "dataset: {} ({} monotone / {} non-monotone, {} attempts)",
        out.display(),
        d.meta.monotone_count,
        d.meta.non_monotone_count,
        d.meta.attempts
    );
    Ok(())
}

pub fn cmd_featurize(a: &FeaturizeArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let stem = a
        .dataset
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| String::from("dataset"));
    let out = common.out_or(&format!("{stem}_features.csv"));
    let d = load_dataset(&a.dataset)?;
    let mut table = featurize_dataset(&d);
    if !table.failures.is_empty() {
        common.note(&format!(
            "featurize: {} rows failed eigenvalue extraction and were skipped",
            table.failures.len()
        ));
    }
    let standardizer = if a.no_standardize {
        None
    } else {
        let mask = vec![true; table.n_rows()];
        let std = Standardizer::fit(&table, &mask);
        std.apply(&mut table);
        Some(std)
    };
    write_feature_csv(&table, &out)?;
    let sidecar = write_schema_sidecar(&out, &table, standardizer.as_ref())?;
    RunManifest::new("featurize")
        .arg("dataset", a.dataset.display())
        .arg("standardize", !a.no_standardize)
        .input(&a.dataset)
        .output(&out)
        .output(&sidecar)
        .write(&out, started.elapsed().as_secs_f64())?;
    println!(
        "features: {} ({} rows x {} columns + label,r01,r012)",
        out.display(),
        table.n_rows(),
        table.width()
    );
    Ok(())
}

/// Model input assembled from a feature table for one preset.
struct ModelInput {
    x: Vec<f64>,
    names: Vec<String>,
    labels: Vec<bool>,
    /// Rows dropped because their ratio was undefined.
    excluded: usize,
    /// Indices into the source table for each kept row.
    kept_rows: Vec<usize>,
}

fn preset_input(table: &LoadedTable, preset: ModelPreset) -> Result<ModelInput, LabError> {
    let all_rows: Vec<usize> = (0..table.n_rows()).collect();
    match preset {
        ModelPreset::OneFeat => {
            let mut x = Vec::new();
            let mut labels = Vec::new();
            let mut kept_rows = Vec::new();
            for (i, r) in table.ratios.iter().enumerate() {
                if let Some(v) = r.r01 {
                    x.push(v);
                    labels.push(table.labels[i]);
                    kept_rows.push(i);
                }
            }
            let excluded = table.n_rows() - labels.len();
            Ok(ModelInput {
                x,
                names: vec![String::from("r01")],
                labels,
                excluded,
                kept_rows,
            })
        }
        ModelPreset::TwoFeat => {
            let cols = table.columns(&["abs_c_0", "abs_c_1"])?;
            Ok(ModelInput {
                x: table.select(&cols),
                names: vec![String::from("abs_c_0"), String::from("abs_c_1")],
                labels: table.labels.clone(),
                excluded: 0,
                kept_rows: all_rows,
            })
        }
        ModelPreset::Raw49 => {
            let names: Vec<String> = table
                .names
                .iter()
                .filter(|n| n.starts_with("entry_"))
                .cloned()
                .collect();
            if names.is_empty() {
                return Err(LabError::Usage(String::from(
                    "RAW49 needs entry_* columns in the feature table",
                )));
            }
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let cols = table.columns(&refs)?;
            Ok(ModelInput {
                x: table.select(&cols),
                names,
                labels: table.labels.clone(),
                excluded: 0,
                kept_rows: all_rows,
            })
        }
        ModelPreset::Hybrid73 | ModelPreset::Subdomain => Ok(ModelInput {
            x: table.values.clone(),
            names: table.names.clone(),
            labels: table.labels.clone(),
            excluded: 0,
            kept_rows: all_rows,
        }),
    }
}

fn parse_widths(s: &str) -> Result<Vec<usize>, LabError> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| LabError::Usage(format!("bad width '{w}'")))
        })
        .collect()
}

struct TrainedBundle {
    model: MlpModel,
    header: CheckpointHeader,
    history: nn::TrainHistory,
    report: MetricsReport,
}

/// Shared training pipeline: optional standardization fitted on the
/// training split, preset architecture, metrics on the full input and
/// on the validation split.
fn train_pipeline(
    mut input: ModelInput,
    spec: MlpSpec,
    preset: ModelPreset,
    cfg: &TrainConfig,
    already_standardized: bool,
    standardize: bool,
) -> Result<TrainedBundle, LabError> {
    let dim = input.names.len();
    if spec.input_dim != dim {
        return Err(LabError::DimensionMismatch(format!(
            "preset expects {} inputs, table provides {dim}",
            spec.input_dim
        )));
    }
    if input.labels.len() < 4 {
        return Err(LabError::Usage(format!(
            "training needs at least 4 rows, got {}",
            input.labels.len()
        )));
    }
    let standardizer = if standardize && !already_standardized {
        let (train_idx, _) = nn::stratified_split(&input.labels, cfg);
        let mut mask = vec![false; input.labels.len()];
        for i in train_idx {
            mask[i] = true;
        }
        let std = Standardizer::fit_matrix(&input.x, dim, &mask);
        for row in input.x.chunks_mut(dim) {
            std.transform_row(row);
        }
        Some(std)
    } else {
        None
    };

    let seed = cfg.seed;
    let mut model = MlpModel::build(spec, seed)?;
    let data = DataView::new(&input.x, dim, &input.labels);
    let history = nn::train(&mut model, data, cfg)?;

    let full_counts = nn::evaluate(&model, data, 0.5)?;
    let full = MetricsBlock::new(&full_counts, &metrics(&full_counts));
    let (_, val_idx) = nn::stratified_split(&input.labels, cfg);
    let validation = if val_idx.is_empty() {
        None
    } else {
        let mut vx = Vec::with_capacity(val_idx.len() * dim);
        let mut vy = Vec::with_capacity(val_idx.len());
        for &i in &val_idx {
            vx.extend_from_slice(&input.x[i * dim..(i + 1) * dim]);
            vy.push(input.labels[i]);
        }
        let c = nn::evaluate(&model, DataView::new(&vx, dim, &vy), 0.5)?;
        Some(MetricsBlock::new(&c, &metrics(&c)))
    };

    let header = CheckpointHeader {
        spec: model.spec.clone(),
        train_meta: model.train_meta.clone(),
        seed,
        preset: Some(preset.name().to_string()),
        columns: input.names.clone(),
        schema_hash: schema_hash(&input.names),
        standardizer,
    };
    let report = MetricsReport {
        preset: preset.name().to_string(),
        full,
        validation,
        best_epoch: history.best_epoch,
        epochs_run: history.epochs.len(),
        stopped_early: history.stopped_early,
        excluded_undefined_ratio: input.excluded,
    };
    Ok(TrainedBundle {
        model,
        header,
        history,
        report,
    })
}

pub fn cmd_train(a: &TrainArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let preset = ModelPreset::from_name(&a.preset)
        .ok_or_else(|| LabError::Usage(format!("unknown preset '{}'", a.preset)))?;
    let out = common.out_or(&format!("model_{}.ckpt", preset.name().to_lowercase()));
    let table = read_feature_csv(&a.features)?;
    let input = preset_input(&table, preset)?;
    if input.excluded > 0 {
        common.note(&format!(
            "train: excluded {} rows with undefined ratio",
            input.excluded
        ));
    }
    let n = table.matrix_dim()?;
    let mut spec = preset.spec(n);
    if let Some(widths) = &a.widths {
        let widths = parse_widths(widths)?;
        let dropout = spec.dropout_rates.first().copied().unwrap_or(0.0);
        spec = MlpSpec::new(input.names.len(), widths, dropout, spec.l2_lambda);
    }
    let cfg = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch_size,
        max_epochs: a.max_epochs,
        patience: a.patience,
        val_fraction: a.val_fraction,
        seed: common.seed,
        shuffle: true,
    };
    let already_standardized = table
        .sidecar
        .as_ref()
        .is_some_and(|s| s.standardized);
    let bundle = train_pipeline(
        input,
        spec,
        preset,
        &cfg,
        already_standardized,
        !a.no_standardize,
    )?;

    save_model(&out, &bundle.model, &bundle.header)?;
    let history_path = with_suffix(&out, ".history.csv");
    write_history_csv(&history_path, &bundle.history)?;
    let metrics_path = with_suffix(&out, ".metrics.json");
    write_metrics_json(&metrics_path, &bundle.report)?;
    RunManifest::new("train")
        .arg("features", a.features.display())
        .arg("preset", preset.name())
        .arg("lr", a.lr)
        .arg("batch_size", a.batch_size)
        .arg("max_epochs", a.max_epochs)
        .arg("patience", a.patience)
        .arg("val_fraction", a.val_fraction)
        .arg(
            "widths",
            a.widths.clone().unwrap_or_else(|| String::from("preset")),
        )
        .arg("standardize", !a.no_standardize)
        .seed(common.seed)
        .input(&a.features)
        .output(&out)
        .output(&history_path)
        .output(&metrics_path)
        .write(&out, started.elapsed().as_secs_f64())?;

    let val_acc = bundle
        .report
        .validation
        .as_ref()
        .map(|v| v.accuracy)
        .unwrap_or(f64::NAN);
    println!(
        "model: {} (preset {}, full accuracy {:.4}, validation accuracy {:.4}, best epoch {})",
        out.display(),
        preset.name(),
        bundle.report.full.accuracy,
        val_acc,
        bundle.report.best_epoch
    );
    Ok(())
}

/// Rebuild the exact input space a checkpoint was trained on.
fn model_input_for(header: &CheckpointHeader, table: &LoadedTable) -> Result<ModelInput, LabError> {
    let mut input = if header.columns == [String::from("r01")] {
        let mut x = Vec::new();
        let mut labels = Vec::new();
        let mut kept_rows = Vec::new();
        for (i, r) in table.ratios.iter().enumerate() {
            if let Some(v) = r.r01 {
                x.push(v);
                labels.push(table.labels[i]);
                kept_rows.push(i);
            }
        }
        let excluded = table.n_rows() - labels.len();
        ModelInput {
            x,
            names: header.columns.clone(),
            labels,
            excluded,
            kept_rows,
        }
    } else {
        let refs: Vec<&str> = header.columns.iter().map(String::as_str).collect();
        let cols = table.columns(&refs)?;
        ModelInput {
            x: table.select(&cols),
            names: header.columns.clone(),
            labels: table.labels.clone(),
            excluded: 0,
            kept_rows: (0..table.n_rows()).collect(),
        }
    };
    if let Some(std) = &header.standardizer {
        let dim = input.names.len();
        for row in input.x.chunks_mut(dim) {
            std.transform_row(row);
        }
    }
    Ok(input)
}

pub fn cmd_ig(a: &IgArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let out = common.out_or("ig");
    let (model, header) = load_model(&a.model)?;
    let table = read_feature_csv(&a.features)?;
    let input = model_input_for(&header, &table)?;
    let baseline = match a.baseline.as_str() {
        "mean" => Baseline::DatasetMean,
        "zero" => Baseline::Zero,
        other => return Err(LabError::Usage(format!("unknown baseline '{other}'"))),
    };
    let quadrature = match a.quadrature.as_str() {
        "trapezoid" => Quadrature::Trapezoid,
        "midpoint" => Quadrature::Midpoint,
        other => return Err(LabError::Usage(format!("unknown quadrature '{other}'"))),
    };
    let cfg = IgConfig {
        steps: a.steps,
        baseline,
        quadrature,
        completeness_tol: a.completeness_tol,
    };
    let report = attribute_dataset(&model, &input.x, &input.names, &cfg)?;

    let csv = with_suffix(&out, "_attribution.csv");
    let topk = with_suffix(&out, "_topk.json");
    let bin = with_suffix(&out, "_ig.bin");
    report::write_attribution_csv(&csv, &report)?;
    report::write_topk_json(&topk, &report, a.top_k, a.steps, &a.quadrature, &a.baseline)?;
    report::write_ig_matrix(&bin, &report)?;
    RunManifest::new("ig")
        .arg("model", a.model.display())
        .arg("features", a.features.display())
        .arg("steps", a.steps)
        .arg("baseline", &a.baseline)
        .arg("quadrature", &a.quadrature)
        .arg("top_k", a.top_k)
        .arg("completeness_tol", a.completeness_tol)
        .input(&a.model)
        .input(&a.features)
        .output(&csv)
        .output(&topk)
        .output(&bin)
        .write(&csv, started.elapsed().as_secs_f64())?;

    let mean_res = report.completeness_residuals.iter().sum::<f64>()
        / report.completeness_residuals.len().max(1) as f64;
    println!(
        "attribution: {} rows, completeness residual mean {:.3e} / max {:.3e} (tolerance {:.1e})",
        report.n_rows,
        mean_res,
        report.max_residual(),
        report.completeness_tol
    );
    let violations = report.completeness_violations();
    if violations > 0 {
        eprintln!(
            "WARNING: {violations} of {} samples exceed the completeness tolerance; \
             raise --steps (800 brings worst cases below ~1e-4) or record the residuals as-is",
            report.n_rows
        );
    }
    for (rank, (name, score)) in report.ranked().iter().take(5).enumerate() {
        println!("  #{} {name} (mean |IG| = {score:.4e})", rank + 1);
    }
    Ok(())
}

pub fn cmd_tree(a: &TreeArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let out = common.out_or("tree");
    let table = read_feature_csv(&a.features)?;

    // Target labels and the rows they cover.
    let (labels, kept_rows, fidelity_target): (Vec<bool>, Vec<usize>, &str) = match a.on.as_str() {
        "labels" => (
            table.labels.clone(),
            (0..table.n_rows()).collect(),
            "ground-truth labels",
        ),
        "predictions" => {
            let model_path = a.model.as_ref().ok_or_else(|| {
                LabError::Usage(String::from("--on predictions requires --model"))
            })?;
            let (model, header) = load_model(model_path)?;
            let input = model_input_for(&header, &table)?;
            let dim = input.names.len();
            let preds: Vec<bool> = (0..input.labels.len())
                .map(|i| {
                    model
                        .predict(&input.x[i * dim..(i + 1) * dim])
                        .map(|p| p > 0.5)
                })
                .collect::<Result<_, _>>()?;
            (preds, input.kept_rows, "model predictions")
        }
        other => return Err(LabError::Usage(format!("unknown target '{other}'"))),
    };

    let col_names: Vec<String> = match &a.cols {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => table.names.clone(),
    };
    let refs: Vec<&str> = col_names.iter().map(String::as_str).collect();
    let cols = table.columns(&refs)?;
    let mut x = Vec::with_capacity(kept_rows.len() * cols.len());
    for &i in &kept_rows {
        let row = table.row(i);
        x.extend(cols.iter().map(|&c| row[c]));
    }

    let tree = fit_tree(&x, cols.len(), &labels, a.depth, a.min_leaf)?;
    let fidelity = tree.agreement(&x, cols.len(), &labels);

    let json = with_suffix(&out, "_tree.json");
    let rules = with_suffix(&out, "_rules.txt");
    report::write_tree_json(&json, &tree, &col_names)?;
    report::write_rules_txt(&rules, &tree.rules(&col_names))?;
    let mut manifest = RunManifest::new("tree")
        .arg("features", a.features.display())
        .arg("on", &a.on)
        .arg("depth", a.depth)
        .arg("min_leaf", a.min_leaf)
        .arg(
            "cols",
            a.cols.clone().unwrap_or_else(|| String::from("all")),
        )
        .input(&a.features)
        .output(&json)
        .output(&rules);

    println!(
        "tree: depth {} using features {:?}, agreement with {} = {:.4}",
        tree.depth(),
        tree.used_features()
            .iter()
            .map(|&f| col_names[f].as_str())
            .collect::<Vec<_>>(),
        fidelity_target,
        fidelity
    );

    // Bands exist only when the tree lives in the (|c0|, |c1|) plane.
    let c0 = col_names.iter().position(|n| n == "abs_c_0");
    let c1 = col_names.iter().position(|n| n == "abs_c_1");
    if let (Some(r), Some(s)) = (c0, c1) {
        match extract_monotone_bands(&tree, r, s) {
            Ok(bands) => {
                let bands_path = with_suffix(&out, "_bands.json");
                report::write_bands_json(&bands_path, &bands)?;
                manifest = manifest.output(&bands_path);
                println!(
                    "bands: {} monotone rectangles -> {}",
                    bands.len(),
                    bands_path.display()
                );
            }
            Err(SurrogateError::NonPlanarTree { feature }) => {
                println!(
                    "bands: skipped (tree also splits on '{}')",
                    col_names[feature]
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    manifest.write(&json, started.elapsed().as_secs_f64())?;
    Ok(())
}

/// Pull a named value column: a ratio column or a schema feature.
fn value_column(
    table: &LoadedTable,
    feature: &str,
) -> Result<(Vec<f64>, Vec<bool>, usize), LabError> {
    match feature {
        "r01" | "r012" => {
            let mut values = Vec::new();
            let mut labels = Vec::new();
            for (i, r) in table.ratios.iter().enumerate() {
                let v = if feature == "r01" { r.r01 } else { r.r012 };
                if let Some(v) = v {
                    values.push(v);
                    labels.push(table.labels[i]);
                }
            }
            let excluded = table.n_rows() - labels.len();
            Ok((values, labels, excluded))
        }
        name => {
            let col = table
                .index_of(name)
                .ok_or_else(|| LabError::Usage(format!("no feature column '{name}'")))?;
            let values: Vec<f64> = (0..table.n_rows()).map(|i| table.row(i)[col]).collect();
            Ok((values, table.labels.clone(), 0))
        }
    }
}

pub fn cmd_stump(a: &StumpArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let table = read_feature_csv(&a.features)?;
    let (values, labels, excluded) = value_column(&table, &a.feature)?;
    if excluded > 0 {
        common.note(&format!("stump: excluded {excluded} undefined-ratio rows"));
    }
    let stump = fit_stump(&values, &labels)?;
    println!(
        "stump: predict monotone iff {} <= {:.6} (accuracy {:.4} on {} rows)",
        a.feature, stump.threshold, stump.accuracy, stump.n_rows
    );
    if let Some(out) = &common.out {
        #[derive(serde::Serialize)]
        struct StumpJson<'a> {
            feature: &'a str,
            threshold: f64,
            accuracy: f64,
            n_rows: usize,
            excluded_undefined: usize,
        }
        let file = std::fs::File::create(out).map_err(LabError::io(out))?;
        serde_json::to_writer_pretty(
            std::io::BufWriter::new(file),
            &StumpJson {
                feature: &a.feature,
                threshold: stump.threshold,
                accuracy: stump.accuracy,
                n_rows: stump.n_rows,
                excluded_undefined: excluded,
            },
        )?;
        RunManifest::new("stump")
            .arg("features", a.features.display())
            .arg("feature", &a.feature)
            .input(&a.features)
            .output(out)
            .write(out, started.elapsed().as_secs_f64())?;
    }
    Ok(())
}

pub fn cmd_svm(a: &SvmArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let out = common.out_or("svm.json");
    let table = read_feature_csv(&a.features)?;
    let col_names: Vec<String> = a.cols.split(',').map(|s| s.trim().to_string()).collect();
    let refs: Vec<&str> = col_names.iter().map(String::as_str).collect();
    let cols = table.columns(&refs)?;
    let x = table.select(&cols);
    let model = fit_linear_svm(&x, cols.len(), &table.labels, a.c, a.epochs, common.seed);
    report::write_svm_json(&out, &model, &col_names)?;
    RunManifest::new("svm")
        .arg("features", a.features.display())
        .arg("cols", &a.cols)
        .arg("c", a.c)
        .arg("epochs", a.epochs)
        .seed(common.seed)
        .input(&a.features)
        .output(&out)
        .write(&out, started.elapsed().as_secs_f64())?;
    let terms: Vec<String> = col_names
        .iter()
        .zip(&model.weights)
        .map(|(n, w)| format!("{w:+.4} {n}"))
        .collect();
    println!(
        "svm: {} {:+.4} = 0 (training accuracy {:.4}) -> {}",
        terms.join(" "),
        model.bias,
        model.train_accuracy,
        out.display()
    );
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, LabError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(LabError::Usage(format!(
            "grid '{spec}' must be lo:hi:count"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| LabError::Usage(format!("bad grid lo '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| LabError::Usage(format!("bad grid hi '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| LabError::Usage(format!("bad grid count '{}'", parts[2])))?;
    if count < 1 || hi <= lo {
        return Err(LabError::Usage(format!("degenerate grid '{spec}'")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let idx = q * (sorted.len() - 1) as f64;
    let lo = idx as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (idx - lo as f64)
}

pub fn cmd_evt(a: &EvtArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let out = common.out_or("evt");
    let table = read_feature_csv(&a.features)?;
    let monotone_only = match a.class.as_str() {
        "monotone" => true,
        "all" => false,
        other => return Err(LabError::Usage(format!("unknown class filter '{other}'"))),
    };
    let mut xs = Vec::new();
    let mut undefined = 0usize;
    for (i, r) in table.ratios.iter().enumerate() {
        if monotone_only && !table.labels[i] {
            continue;
        }
        match r.r01 {
            Some(v) => xs.push(v),
            None => undefined += 1,
        }
    }
    if undefined > 0 {
        common.note(&format!("evt: skipped {undefined} undefined-ratio rows"));
    }
    if xs.is_empty() {
        return Err(LabError::Usage(String::from(
            "no ratio values after class filtering",
        )));
    }

    if a.replicates < 200 {
        return Err(LabError::Usage(format!(
            "--replicates must be at least 200, got {}",
            a.replicates
        )));
    }
    let fit = evt::fit_gpd(&xs, a.u)?;
    let sample_max = xs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let level = a.t.unwrap_or(sample_max);
    let exceed = evt::exceedance_prob(&fit, level)?;
    let ci = evt::bootstrap_ci(&xs, a.u, level, a.replicates, common.seed, a.level)?;
    let summary = evt::TailSummary {
        sample_max,
        endpoint: evt::endpoint_estimate(&fit),
        exceed_prob: exceed,
        level,
        ci_low: ci.ci_low,
        ci_high: ci.ci_high,
        fit,
    };

    let tail_path = with_suffix(&out, "_tail.json");
    report::write_tail_json(&tail_path, &summary)?;
    let boot_path = with_suffix(&out, "_bootstrap.csv");
    report::write_bootstrap_csv(&boot_path, &ci)?;

    // MRL curve over the upper half of the sample.
    let mut sorted = xs.clone();
    sorted.sort_by(|p, q| p.partial_cmp(q).expect("finite ratios"));
    let mrl_grid: Vec<f64> = (0..40)
        .map(|i| {
            let q = 0.5 + 0.495 * i as f64 / 39.0;
            quantile_sorted(&sorted, q)
        })
        .collect();
    let mrl = evt::mean_residual_life(&xs, &mrl_grid)?;
    let mrl_path = with_suffix(&out, "_mrl.csv");
    report::write_mrl_csv(&mrl_path, &mrl)?;

    let mut manifest = RunManifest::new("evt")
        .arg("features", a.features.display())
        .arg("class", &a.class)
        .arg("u", a.u)
        .arg("t", level)
        .arg("replicates", a.replicates)
        .arg("level", a.level)
        .seed(common.seed)
        .input(&a.features)
        .output(&tail_path)
        .output(&boot_path)
        .output(&mrl_path);

    if let Some(grid_spec) = &a.grid {
        let grid = parse_grid(grid_spec)?;
        let scan = evt::stability_scan(&xs, &grid);
        let scan_path = with_suffix(&out, "_stability.csv");
        report::write_stability_csv(&scan_path, &scan, Some(level))?;
        manifest = manifest.arg("grid", grid_spec).output(&scan_path);
        if let Some((mean, sd)) = scan.exceedance_stats(level) {
            println!(
                "stability: P(r > {level:.4}) over u in [{:.4}, {:.4}]: mean {mean:.3e} +/- {sd:.3e}",
                grid.first().unwrap(),
                grid.last().unwrap()
            );
        }
    }
    manifest.write(&tail_path, started.elapsed().as_secs_f64())?;

    let endpoint = match summary.endpoint {
        evt::Endpoint::Finite(e) => format!("{e:.4}"),
        evt::Endpoint::Unbounded => String::from("unbounded"),
    };
    println!(
        "tail: N={} N_u={} xi={:.4} (se {:.4}) sigma={:.4} endpoint={} T_n={:.4}",
        summary.fit.n_total,
        summary.fit.n_exceed,
        summary.fit.xi,
        summary.fit.se_xi,
        summary.fit.sigma,
        endpoint,
        summary.sample_max
    );
    println!(
        "exceedance: P(r > {:.4}) = {:.3e}, {}% CI [{:.3e}, {:.3e}]",
        summary.level,
        summary.exceed_prob,
        (a.level * 100.0) as u32,
        summary.ci_low,
        summary.ci_high
    );
    Ok(())
}

fn parse_matrix_text(text: &str) -> Result<SquareMatrix, LabError> {
    let rows: Vec<Vec<f64>> = text
        .split([';', '\n'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            r.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|f| !f.is_empty())
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| LabError::Format(format!("cannot parse entry '{f}'")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 {
        return Err(LabError::Format(String::from("empty matrix input")));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(LabError::Format(format!(
            "non-square input: {n} rows with lengths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    let entries: Vec<f64> = rows.into_iter().flatten().collect();
    SquareMatrix::new(n, entries).map_err(|e| LabError::Format(e.to_string()))
}

pub fn cmd_check(a: &CheckArgs, common: &Common) -> Result<(), LabError> {
    let text = match (&a.file, &a.inline) {
        (Some(path), None) => std::fs::read_to_string(path).map_err(LabError::io(path))?,
        (None, Some(inline)) => inline.clone(),
        _ => {
            return Err(LabError::Usage(String::from(
                "provide exactly one of --file or --inline",
            )))
        }
    };
    let m = parse_matrix_text(&text)?;
    let n = m.dim();
    let table = match &a.config {
        Some(path) => ThresholdTable::load(path)?,
        None => ThresholdTable::default(),
    };

    println!("matrix: {n}x{n}");

    // Verdict 1: the exact oracle.
    let f = lu_decompose(&m, DEFAULT_PIVOT_TOL);
    let monotone = datagen::is_monotone(&m, a.neg_tol);
    let tr_inv = if f.singular {
        None
    } else {
        Some(invert(&f)?.trace())
    };
    if f.singular {
        println!("oracle: non-monotone (singular matrix)");
    } else {
        println!(
            "oracle: {}",
            if monotone {
                "monotone (invertible and inverse entrywise nonnegative)"
            } else {
                "non-monotone (inverse has negative entries)"
            }
        );
    }

    // Verdict 2: the statistical ratio rule.
    let poly = char_poly(&m);
    let ratios = ratio_features(&poly, DEFAULT_DENOM_TOL);
    match ratios.r01 {
        Some(r) => println!(
            "ratio: |c0| = {:.6}, |c1| = {:.6}, r = |c0/c1| = {r:.6}",
            poly.c0().abs(),
            poly.c1().abs()
        ),
        None => println!("ratio: undefined (c1 = 0)"),
    }
    match (table.get(n), ratios.r01) {
        (Some(t_n), Some(r)) => {
            let verdict = if r <= t_n {
                "PASS (consistent with monotone)"
            } else {
                "FAIL -> non-monotone (statistical)"
            };
            println!(
                "necessary condition (statistical, distribution-specific; n={n}, T_n = {t_n}): {verdict}"
            );
        }
        (None, _) => println!(
            "necessary condition: no reference threshold for n={n} (configure one with threshold.{n} = ...)"
        ),
        (_, None) => println!("necessary condition: not applicable (undefined ratio)"),
    }
    if let Some(tr) = tr_inv {
        print!("tr(A^-1) = {tr:.6}");
        if let Some(t_n) = table.get(n) {
            let bound = 1.0 / t_n;
            println!(
                " (equivalent bound tr(A^-1) >= {bound:.1}: {})",
                if tr >= bound { "PASS" } else { "FAIL" }
            );
        } else {
            println!();
        }
    }

    // Verdict 3: the closed-form score (fitted on n=7 data).
    let verdict = symbolic_formula(poly.c0().abs());
    match verdict.p_hat {
        Some(p) => println!(
            "closed-form score: p_hat = {p:.6} => {}{}",
            if verdict.monotone {
                "monotone"
            } else {
                "non-monotone"
            },
            if verdict.beyond_pole {
                " (|c0| beyond the pole; score re-admits large determinants there)"
            } else {
                ""
            }
        ),
        None => println!("closed-form score: undefined (|c0| at the pole)"),
    }

    if let Some(out) = &common.out {
        #[derive(serde::Serialize)]
        struct CheckJson {
            n: usize,
            monotone: bool,
            singular: bool,
            abs_c0: f64,
            abs_c1: f64,
            r01: Option<f64>,
            threshold: Option<f64>,
            ratio_rule_pass: Option<bool>,
            trace_inverse: Option<f64>,
            formula_p_hat: Option<f64>,
            formula_monotone: bool,
        }
        let json = CheckJson {
            n,
            monotone,
            singular: f.singular,
            abs_c0: poly.c0().abs(),
            abs_c1: poly.c1().abs(),
            r01: ratios.r01,
            threshold: table.get(n),
            ratio_rule_pass: match (table.get(n), ratios.r01) {
                (Some(t), Some(r)) => Some(r <= t),
                _ => None,
            },
            trace_inverse: tr_inv,
            formula_p_hat: verdict.p_hat,
            formula_monotone: verdict.monotone,
        };
        let file = std::fs::File::create(out).map_err(LabError::io(out))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &json)?;
        common.note(&format!("check: report written to {}", out.display()));
    }
    Ok(())
}

pub fn cmd_subdomain(a: &SubdomainArgs, common: &Common) -> Result<(), LabError> {
    let started = Instant::now();
    let out = common.out_or("subdomain");
    let table = read_feature_csv(&a.features)?;

    // Filter to the low-ratio region.
    let kept: Vec<usize> = (0..table.n_rows())
        .filter(|&i| matches!(table.ratios[i].r01, Some(r) if r < a.ratio_cut))
        .collect();
    if kept.is_empty() {
        return Err(LabError::Usage(format!(
            "no rows with defined ratio below {}",
            a.ratio_cut
        )));
    }

    // Balance by undersampling the majority class.
    let mut pos: Vec<usize> = kept.iter().copied().filter(|&i| table.labels[i]).collect();
    let mut neg: Vec<usize> = kept.iter().copied().filter(|&i| !table.labels[i]).collect();
    let mut rng = monotone_core::RngStream::new(common.seed, 1);
    rng.shuffle(&mut pos);
    rng.shuffle(&mut neg);
    let keep_n = pos.len().min(neg.len());
    if keep_n == 0 {
        return Err(LabError::Usage(String::from(
            "subdomain contains a single class; nothing to train on",
        )));
    }
    let mut rows: Vec<usize> = pos[..keep_n]
        .iter()
        .chain(&neg[..keep_n])
        .copied()
        .collect();
    rows.sort_unstable();

    let filtered_csv = with_suffix(&out, "_features.csv");
    write_loaded_csv(&filtered_csv, &table, &rows)?;
    common.note(&format!(
        "subdomain: {} of {} rows below ratio {} kept ({keep_n} per class)",
        rows.len(),
        table.n_rows(),
        a.ratio_cut
    ));

    // Retrain on the filtered, balanced rows with the stronger-L2 preset.
    let n = table.matrix_dim()?;
    let preset = ModelPreset::Subdomain;
    let labels: Vec<bool> = rows.iter().map(|&i| table.labels[i]).collect();
    let mut x = Vec::with_capacity(rows.len() * table.dim);
    for &i in &rows {
        x.extend_from_slice(table.row(i));
    }
    let input = ModelInput {
        x,
        names: table.names.clone(),
        labels,
        excluded: 0,
        kept_rows: rows.clone(),
    };
    let mut spec = preset.spec(n);
    if let Some(widths) = &a.widths {
        let widths = parse_widths(widths)?;
        let dropout = spec.dropout_rates.first().copied().unwrap_or(0.0);
        spec = MlpSpec::new(input.names.len(), widths, dropout, spec.l2_lambda);
    }
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        max_epochs: a.max_epochs,
        patience: defaults.patience.min(a.max_epochs),
        seed: common.seed,
        ..defaults
    };
    let already_standardized = table
        .sidecar
        .as_ref()
        .is_some_and(|s| s.standardized);
    let bundle = train_pipeline(input, spec, preset, &cfg, already_standardized, true)?;

    let model_path = with_suffix(&out, "_model.ckpt");
    save_model(&model_path, &bundle.model, &bundle.header)?;
    write_history_csv(&with_suffix(&out, "_model.history.csv"), &bundle.history)?;
    write_metrics_json(&with_suffix(&out, "_model.metrics.json"), &bundle.report)?;

    // Re-attribute inside the subdomain.
    let attr_table = read_feature_csv(&filtered_csv)?;
    let attr_input = model_input_for(&bundle.header, &attr_table)?;
    let ig_cfg = IgConfig::default();
    let report = attribute_dataset(&bundle.model, &attr_input.x, &attr_input.names, &ig_cfg)?;
    let attr_csv = with_suffix(&out, "_attribution.csv");
    report::write_attribution_csv(&attr_csv, &report)?;
    report::write_topk_json(
        &with_suffix(&out, "_topk.json"),
        &report,
        30,
        ig_cfg.steps,
        "trapezoid",
        "mean",
    )?;

    RunManifest::new("subdomain")
        .arg("features", a.features.display())
        .arg("ratio_cut", a.ratio_cut)
        .arg("max_epochs", a.max_epochs)
        .seed(common.seed)
        .input(&a.features)
        .output(&filtered_csv)
        .output(&model_path)
        .output(&attr_csv)
        .write(&filtered_csv, started.elapsed().as_secs_f64())?;

    println!(
        "subdomain model: accuracy {:.4} on {} balanced rows (ratio < {})",
        bundle.report.full.accuracy,
        rows.len(),
        a.ratio_cut
    );
    println!("subdomain salience ranking:");
    for (rank, (name, score)) in report.ranked().iter().take(5).enumerate() {
        println!("  #{} {name} (mean |IG| = {score:.4e})", rank + 1);
    }
    Ok(())
}
