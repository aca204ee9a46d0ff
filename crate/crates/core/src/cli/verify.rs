//! Re-validates the fingerprints embedded in a run directory.

use super::config::RunConfig;
use super::run::FP_FILE_CHARS;
use crate::error::{Result, ZakError};
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct FileCheck {
    pub file: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub dir: String,
    /// Fingerprint recomputed from `config.json`.
    pub fingerprint: Option<String>,
    pub files: Vec<FileCheck>,
    pub runs: Vec<VerifyReport>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        (self.fingerprint.is_some() || !self.runs.is_empty())
            && self.files.iter().all(|f| f.ok)
            && self.runs.iter().all(|r| r.ok())
    }
}

fn check(file: &str, ok: bool, detail: impl Into<String>) -> FileCheck {
    FileCheck {
        file: file.into(),
        ok,
        detail: detail.into(),
    }
}

fn recompute(dir: &Path) -> std::result::Result<String, String> {
    let text = fs::read_to_string(dir.join("config.json")).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let cfg: RunConfig = serde_json::from_value(v["config"].clone()).map_err(|e| e.to_string())?;
    let fp = cfg.fingerprint();
    match v["fingerprint"].as_str() {
        Some(s) if s == fp => Ok(fp),
        Some(s) => Err(format!("stored {s} but config hashes to {fp}")),
        None => Err("no fingerprint field".into()),
    }
}

fn check_file(path: &Path, name: &str, fp: &str) -> Option<FileCheck> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Some(match ext {
        "csv" => {
            let first = fs::File::open(path)
                .ok()
                .and_then(|f| BufReader::new(f).lines().next())
                .and_then(|l| l.ok())
                .unwrap_or_default();
            match first.strip_prefix("# fingerprint: ") {
                Some(s) if s.trim() == fp => check(name, true, "csv header"),
                Some(s) => check(name, false, format!("csv carries {}", s.trim())),
                None => check(name, false, "csv has no fingerprint line"),
            }
        }
        "json" => {
            let v: Option<Value> = fs::read_to_string(path).ok().and_then(|t| serde_json::from_str(&t).ok());
            match v.as_ref().and_then(|v| v["fingerprint"].as_str()) {
                Some(s) if s == fp => check(name, true, "json field"),
                Some(s) => check(name, false, format!("json carries {s}")),
                None => check(name, false, "json has no fingerprint field"),
            }
        }
        "zak" => {
            let tag = &fp[..FP_FILE_CHARS];
            let readable = fs::File::open(path)
                .map_err(ZakError::from)
                .and_then(|f| crate::grid::read_checkpoint(BufReader::new(f)))
                .is_ok();
            let named = name.trim_end_matches(".zak").ends_with(tag);
            check(
                name,
                named && readable,
                match (named, readable) {
                    (true, true) => "checkpoint name",
                    (false, _) => "checkpoint name lacks fingerprint",
                    (true, false) => "checkpoint unreadable",
                },
            )
        }
        _ => return None,
    })
}

/// Checks `config.json` and every csv, json and checkpoint file in `dir`.
/// Subdirectories holding their own `config.json` (sweep members) are
/// verified recursively.
pub fn verify_dir(dir: impl AsRef<Path>) -> Result<VerifyReport> {
    let dir = dir.as_ref();
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    let has_config = dir.join("config.json").is_file();
    let mut rep = VerifyReport {
        dir: dir.display().to_string(),
        fingerprint: None,
        files: Vec::new(),
        runs: Vec::new(),
    };
    if has_config {
        match recompute(dir) {
            Ok(fp) => rep.fingerprint = Some(fp),
            Err(e) => rep.files.push(check("config.json", false, e)),
        }
    }
    for e in entries {
        let path = e.path();
        let name = e.file_name().to_string_lossy().into_owned();
        if path.is_dir() {
            if path.join("config.json").is_file() {
                rep.runs.push(verify_dir(&path)?);
            }
            continue;
        }
        if name == "sweep.json" && !has_config {
            continue;
        }
        if let Some(fp) = &rep.fingerprint {
            if let Some(c) = check_file(&path, &name, fp) {
                rep.files.push(c);
            }
        }
    }
    Ok(rep)
}
