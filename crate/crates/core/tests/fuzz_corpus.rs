//! Replays the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::path::{Path, PathBuf};

use reservoir_w::experiments::{DeviationChannel, FigureId};
use reservoir_w::io::{
    parse_config, parse_document, parse_trajectory_csv, render_config, render_document, write_trajectory_csv,
    RunManifest,
};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, bytes) in seeds("parse_config") {
        let Ok(cfg) = parse_config(std::str::from_utf8(&bytes).unwrap()) else { continue };
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg, "{}", path.display());
        accepted += 1;
    }
    assert!(accepted >= 5);
}

#[test]
fn document_seeds() {
    for (path, bytes) in seeds("parse_document") {
        let doc = parse_document(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_document(&render_document(&doc)).unwrap(), doc, "{}", path.display());
    }
}

#[test]
fn trajectory_seeds() {
    for (path, bytes) in seeds("parse_trajectory_csv") {
        let tr = parse_trajectory_csv(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut out = Vec::new();
        write_trajectory_csv(&tr, &mut out).unwrap();
        assert_eq!(out, bytes, "{}", path.display());
    }
}

#[test]
fn manifest_seeds() {
    for (path, bytes) in seeds("parse_manifest") {
        let m: RunManifest = serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(m.outputs.iter().any(|f| f == "manifest.json"));
        parse_config(&m.config_snapshot).unwrap();
    }
}

#[test]
fn id_seeds() {
    for (path, bytes) in seeds("parse_ids") {
        let s = String::from_utf8(bytes).unwrap();
        let known = FigureId::parse(&s).is_ok() || DeviationChannel::parse(&s).is_some();
        assert!(known || s.chars().any(|c| c.is_ascii_uppercase()), "{}", path.display());
    }
}
