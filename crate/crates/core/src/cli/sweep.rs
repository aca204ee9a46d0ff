//! Cartesian parameter sweeps over one base config.

use super::config::{parse_config, ConfigErrors, Experiment};
use super::run::{run_in, RunStatus};
use crate::error::{Result, ZakError};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub assignments: Vec<String>,
    pub fingerprint: String,
    pub outdir: String,
    pub exit_code: i32,
}

/// Parses `key=v1,v2,...`.
pub fn parse_vary(spec: &str) -> std::result::Result<(String, Vec<String>), String> {
    let (k, vs) = spec
        .split_once('=')
        .ok_or_else(|| format!("--vary {spec:?} is not of the form key=v1,v2"))?;
    let vals: Vec<String> = vs.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if k.trim().is_empty() || vals.is_empty() {
        return Err(format!("--vary {spec:?} needs a key and at least one value"));
    }
    Ok((k.trim().to_string(), vals))
}

/// All assignment lists of the Cartesian product, first key slowest.
pub fn combinations(vary: &[(String, Vec<String>)]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for (k, vals) in vary {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<String>| {
                vals.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(format!("{k}={v}"));
                    p
                })
            })
            .collect();
    }
    out
}

/// Validates every member first, then runs them in parallel under
/// `outdir/run_NNN` and writes `outdir/sweep.json`.
pub fn sweep(
    text: &str,
    overrides: &[String],
    forced: Option<Experiment>,
    vary: &[(String, Vec<String>)],
    outdir: &Path,
) -> Result<Vec<SweepEntry>> {
    let combos = combinations(vary);
    let mut cfgs = Vec::with_capacity(combos.len());
    let mut errs = Vec::new();
    for (i, c) in combos.iter().enumerate() {
        let mut o = overrides.to_vec();
        o.extend(c.iter().cloned());
        match parse_config(text, &o, forced) {
            Ok(cfg) => cfgs.push(cfg),
            Err(ConfigErrors(e)) => errs.extend(e.into_iter().map(|m| format!("run {i} [{}]: {m}", c.join(" ")))),
        }
    }
    if !errs.is_empty() {
        return Err(ZakError::Config(errs));
    }
    std::fs::create_dir_all(outdir)?;
    let entries = cfgs
        .par_iter()
        .zip(combos.par_iter())
        .enumerate()
        .map(|(i, (cfg, c))| {
            let dir = outdir.join(format!("run_{i:03}"));
            let o = run_in(cfg, &dir)?;
            Ok(SweepEntry {
                index: i,
                assignments: c.clone(),
                fingerprint: o.fingerprint,
                outdir: dir.display().to_string(),
                exit_code: if o.status == RunStatus::Ok { 0 } else { 1 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let f = std::fs::File::create(outdir.join("sweep.json"))?;
    serde_json::to_writer_pretty(f, &json!({ "runs": entries }))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_and_parsing() {
        let v = vec![parse_vary("alpha=1,2").unwrap(), parse_vary("grid.n=16,32,64").unwrap()];
        let c = combinations(&v);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec!["alpha=1", "grid.n=16"]);
        assert_eq!(c[5], vec!["alpha=2", "grid.n=64"]);
        assert!(parse_vary("alpha").is_err());
        assert!(parse_vary("alpha=").is_err());
    }
}
