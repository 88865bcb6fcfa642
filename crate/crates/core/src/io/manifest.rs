use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::Trajectory;
use crate::model::{validate_config, SystemConfig};

use super::csv_out::{create, write_table_csv, write_trajectory_csv};
use super::{render_config, IoError};

pub const MANIFEST_NAME: &str = "manifest.json";

/// One emitted series and the exact system it was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub name: String,
    pub file: String,
    pub config: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Subcommand or figure id.
    pub command: String,
    pub unit_mode: String,
    pub config_snapshot: String,
    pub config_sha256: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub series: Vec<SeriesRecord>,
    /// Every file written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &SystemConfig) -> Self {
        let snapshot = render_config(cfg);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            unit_mode: cfg.unit_mode.as_str().to_string(),
            config_sha256: config_hash(&snapshot),
            config_snapshot: snapshot,
            parameters: BTreeMap::new(),
            series: Vec::new(),
            outputs: Vec::new(),
            warnings: validate_config(cfg).iter().map(ToString::to_string).collect(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    /// Adds warnings for `cfg` that are not already listed.
    pub fn note_config(&mut self, cfg: &SystemConfig) {
        for w in validate_config(cfg) {
            let w = w.to_string();
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
    }
}

pub fn config_hash(snapshot: &str) -> String {
    Sha256::digest(snapshot.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self, IoError> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(&root).map_err(IoError::file(&root))?;
        Ok(Self { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        self.root.join(name)
    }

    pub fn write_trajectory(&mut self, name: &str, traj: &Trajectory) -> Result<PathBuf, IoError> {
        let path = self.record(name);
        write_trajectory_csv(traj, create(&path)?)?;
        Ok(path)
    }

    pub fn write_table<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, IoError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let path = self.record(name);
        write_table_csv(create(&path)?, header, rows)?;
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, IoError> {
        let path = self.record(name);
        std::fs::write(&path, text).map_err(IoError::file(&path))?;
        Ok(path)
    }

    /// Writes `manifest` (listing itself and every earlier file) and returns its path.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<PathBuf, IoError> {
        let path = self.record(MANIFEST_NAME);
        manifest.outputs = self.written;
        let json = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, json + "\n").map_err(IoError::file(&path))?;
        Ok(path)
    }
}
