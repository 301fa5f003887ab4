//! Feature table CSV with its JSON schema sidecar.
//!
//! The CSV header is the schema's feature names followed by
//! `label,r01,r012`; undefined ratios serialize as empty fields. Floats
//! are written in Rust's shortest round-trip form, so a write/read
//! cycle is value-exact. The sidecar carries the name-to-index map and,
//! when the table was standardized at export time, the fitted means and
//! stds.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use monotone_core::features::{FeatureTable, RatioFeatures, Standardizer};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// Sidecar describing a feature CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaSidecar {
    /// Matrix dimension the features came from.
    pub n: usize,
    /// Ordered feature names (the CSV column order).
    pub names: Vec<String>,
    /// Name -> column index.
    pub index: BTreeMap<String, usize>,
    /// Whether the stored feature values are z-scored.
    pub standardized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stds: Option<Vec<f64>>,
}

/// Conventional sidecar path: `<csv>.schema.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut os = csv.as_os_str().to_owned();
    os.push(".schema.json");
    PathBuf::from(os)
}

pub fn write_schema_sidecar(
    csv: &Path,
    table: &FeatureTable,
    standardizer: Option<&Standardizer>,
) -> Result<PathBuf, LabError> {
    let path = sidecar_path(csv);
    let names: Vec<String> = table.schema.names().to_vec();
    let index = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let sidecar = SchemaSidecar {
        n: table.schema.matrix_dim(),
        names,
        index,
        standardized: standardizer.is_some(),
        means: standardizer.map(|s| s.means.clone()),
        stds: standardizer.map(|s| s.stds.clone()),
    };
    let file = File::create(&path).map_err(LabError::io(&path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &sidecar)?;
    Ok(path)
}

pub fn read_schema_sidecar(csv: &Path) -> Result<Option<SchemaSidecar>, LabError> {
    let path = sidecar_path(csv);
    if !path.exists() {
        return Ok(None);
    }
    let file = File::open(&path).map_err(LabError::io(&path))?;
    Ok(Some(serde_json::from_reader(BufReader::new(file))?))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Write the feature CSV (values as stored in `table`).
pub fn write_feature_csv(table: &FeatureTable, path: &Path) -> Result<(), LabError> {
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    let mut header = table.schema.names().join(",");
    header.push_str(",label,r01,r012\n");
    w.write_all(header.as_bytes()).map_err(LabError::io(path))?;
    for i in 0..table.n_rows() {
        let mut line = String::new();
        for (k, v) in table.row(i).iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        let r = table.ratios[i];
        line.push_str(&format!(
            ",{},{},{}\n",
            u8::from(table.labels[i]),
            fmt_opt(r.r01),
            fmt_opt(r.r012)
        ));
        w.write_all(line.as_bytes()).map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

/// A feature CSV read back into memory.
#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub names: Vec<String>,
    pub dim: usize,
    /// Flat row-major feature values.
    pub values: Vec<f64>,
    pub labels: Vec<bool>,
    pub ratios: Vec<RatioFeatures>,
    pub sidecar: Option<SchemaSidecar>,
}

impl LoadedTable {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Column indices for a list of feature names.
    pub fn columns(&self, names: &[&str]) -> Result<Vec<usize>, LabError> {
        names
            .iter()
            .map(|n| {
                self.index_of(n).ok_or_else(|| {
                    LabError::Usage(format!("feature column '{n}' not present in the table"))
                })
            })
            .collect()
    }

    /// Flat row-major submatrix of the selected columns.
    pub fn select(&self, cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            out.extend(cols.iter().map(|&c| row[c]));
        }
        out
    }

    /// Matrix dimension, from the sidecar or inferred from entry columns.
    pub fn matrix_dim(&self) -> Result<usize, LabError> {
        if let Some(sc) = &self.sidecar {
            return Ok(sc.n);
        }
        let entries = self
            .names
            .iter()
            .filter(|n| n.starts_with("entry_"))
            .count();
        let n = (entries as f64).sqrt() as usize;
        if n >= 2 && n * n == entries {
            Ok(n)
        } else {
            Err(LabError::Format(format!(
                "cannot infer matrix dimension from {entries} entry columns"
            )))
        }
    }
}

/// Write a row subset of a loaded table back out in the same CSV format.
pub fn write_loaded_csv(path: &Path, table: &LoadedTable, rows: &[usize]) -> Result<(), LabError> {
    let file = File::create(path).map_err(LabError::io(path))?;
    let mut w = BufWriter::new(file);
    let mut header = table.names.join(",");
    header.push_str(",label,r01,r012\n");
    w.write_all(header.as_bytes()).map_err(LabError::io(path))?;
    for &i in rows {
        let mut line = String::new();
        for (k, v) in table.row(i).iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        let r = table.ratios[i];
        line.push_str(&format!(
            ",{},{},{}\n",
            u8::from(table.labels[i]),
            fmt_opt(r.r01),
            fmt_opt(r.r012)
        ));
        w.write_all(line.as_bytes()).map_err(LabError::io(path))?;
    }
    w.flush().map_err(LabError::io(path))?;
    // Carry the sidecar along so downstream stages keep the context.
    if let Some(sc) = &table.sidecar {
        let sidecar = sidecar_path(path);
        let file = File::create(&sidecar).map_err(LabError::io(&sidecar))?;
        serde_json::to_writer_pretty(BufWriter::new(file), sc)?;
    }
    Ok(())
}

fn parse_field(field: &str, path: &Path, row: usize, col: usize) -> Result<f64, LabError> {
    field.parse::<f64>().map_err(|_| {
        LabError::Format(format!(
            "{}: row {row}, column {col}: cannot parse '{field}'",
            path.display()
        ))
    })
}

/// Read a feature CSV produced by [`write_feature_csv`].
pub fn read_feature_csv(path: &Path) -> Result<LoadedTable, LabError> {
    let file = File::open(path).map_err(LabError::io(path))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| LabError::Format(format!("{}: empty file", path.display())))?
        .map_err(LabError::io(path))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[cols.len() - 3..] != ["label", "r01", "r012"] {
        return Err(LabError::Format(format!(
            "{}: header must end with label,r01,r012",
            path.display()
        )));
    }
    let dim = cols.len() - 3;
    let names: Vec<String> = cols[..dim].iter().map(|s| s.to_string()).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut ratios = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.map_err(LabError::io(path))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(LabError::Format(format!(
                "{}: row {row} has {} fields, expected {}",
                path.display(),
                fields.len(),
                cols.len()
            )));
        }
        for (col, f) in fields[..dim].iter().enumerate() {
            values.push(parse_field(f, path, row, col)?);
        }
        labels.push(match fields[dim] {
            "0" => false,
            "1" => true,
            other => {
                return Err(LabError::Format(format!(
                    "{}: row {row}: label '{other}' is not 0/1",
                    path.display()
                )))
            }
        });
        let opt = |f: &str, col: usize| -> Result<Option<f64>, LabError> {
            if f.is_empty() {
                Ok(None)
            } else {
                parse_field(f, path, row, col).map(Some)
            }
        };
        ratios.push(RatioFeatures {
            r01: opt(fields[dim + 1], dim + 1)?,
            r012: opt(fields[dim + 2], dim + 2)?,
        });
    }
    let sidecar = read_schema_sidecar(path)?;
    Ok(LoadedTable {
        names,
        dim,
        values,
        labels,
        ratios,
        sidecar,
    })
}
