//! Configuration files, CSV output and run manifests.

mod config;
mod csv_out;
mod manifest;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;

pub use config::{parse_config, parse_document, render_config, render_document, ConfigDocument, RunSpec};
pub use csv_out::{
    parse_trajectory_csv, read_trajectory_csv, write_table_csv, write_trajectory_csv, TRAJECTORY_HEADER,
};
pub use manifest::{config_hash, OutputDir, RunManifest, SeriesRecord, MANIFEST_NAME};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Syntax { line: Option<usize>, message: String },
    #[error("{}{key}: {reason}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Value { line: Option<usize>, key: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl IoError {
    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> IoError {
        let path = path.into();
        move |source| IoError::File { path, source }
    }
}
