//! Key-value configuration for the statistical threshold table.
//!
//! Format: one `threshold.<n> = <value>` entry per line; `#` starts a
//! comment; blank lines are ignored. These thresholds are statistical,
//! distribution-specific reference values for uniform `(-1,1)` entry
//! matrices, not theorems, and the `check` command says so in its
//! output.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::LabError;

/// Sample-maximum ratio thresholds per matrix dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    per_n: BTreeMap<usize, f64>,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        let mut per_n = BTreeMap::new();
        per_n.insert(5, 0.5968);
        per_n.insert(7, 0.1755);
        per_n.insert(10, 0.104);
        Self { per_n }
    }
}

impl ThresholdTable {
    pub fn get(&self, n: usize) -> Option<f64> {
        self.per_n.get(&n).copied()
    }

    pub fn set(&mut self, n: usize, t: f64) {
        self.per_n.insert(n, t);
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.per_n.iter().map(|(&n, &t)| (n, t))
    }

    /// Parse the key-value format, overlaying the defaults.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut table = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LabError::Format(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let n = key
                .strip_prefix("threshold.")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| {
                    LabError::Format(format!(
                        "config line {}: unknown key '{key}' (expected threshold.<n>)",
                        lineno + 1
                    ))
                })?;
            let t = value.parse::<f64>().map_err(|_| {
                LabError::Format(format!(
                    "config line {}: cannot parse value '{value}'",
                    lineno + 1
                ))
            })?;
            table.set(n, t);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_reference_values() {
        let t = ThresholdTable::default();
        assert_eq!(t.get(7), Some(0.1755));
        assert_eq!(t.get(5), Some(0.5968));
        assert_eq!(t.get(10), Some(0.104));
        assert_eq!(t.get(4), None);
    }

    #[test]
    fn parse_overlays_and_rejects_junk() {
        let t = ThresholdTable::parse("# comment\nthreshold.7 = 0.2\nthreshold.4=0.9\n").unwrap();
        assert_eq!(t.get(7), Some(0.2));
        assert_eq!(t.get(4), Some(0.9));
        assert_eq!(t.get(5), Some(0.5968));
        assert!(ThresholdTable::parse("nonsense").is_err());
        assert!(ThresholdTable::parse("foo = 1").is_err());
        assert!(ThresholdTable::parse("threshold.7 = abc").is_err());
    }
}
