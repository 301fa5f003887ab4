//! Run manifests: every primary artifact gets a `<file>.manifest.json`
//! sidecar recording the resolved invocation, enough to re-run the
//! command and reproduce the artifact byte for byte.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved flags, flag-name to value.
    pub args: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub wall_time_secs: f64,
    pub created_unix_ms: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            args: Vec::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
            created_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
        }
    }

    pub fn arg(mut self, key: &str, value: impl ToString) -> Self {
        self.args.push((key.to_string(), value.to_string()));
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Write next to the primary artifact.
    pub fn write(mut self, primary: &Path, wall_time_secs: f64) -> Result<PathBuf, LabError> {
        self.wall_time_secs = wall_time_secs;
        let mut os = primary.as_os_str().to_owned();
        os.push(".manifest.json");
        let path = PathBuf::from(os);
        let file = std::fs::File::create(&path).map_err(LabError::io(&path))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &self)?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, LabError> {
    let file = std::fs::File::open(path).map_err(LabError::io(path))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}
